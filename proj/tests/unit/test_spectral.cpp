#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "bachgeom/catalog.hpp"
#include "bachgeom/spectral.hpp"
#include "helpers.hpp"

using namespace bachgeom;
using testing_helpers::box;
using testing_helpers::kTwoPi;

namespace {

PotentialHook constant_potential(double c) {
  PotentialHook h;
  h.replace = [c](const Point&) { return c; };
  return h;
}

double dense_lowest(const DiscreteOperator& op) {
  const Eigen::MatrixXd K = Eigen::MatrixXd(op.stiffness);
  const auto N = static_cast<Eigen::Index>(op.size());
  Eigen::MatrixXd A(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j)
      A(i, j) = 6.0 * K(i, j) / std::sqrt(op.mass[i] * op.mass[j]) + (i == j ? op.potential[i] : 0.0);
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

}  // namespace

TEST(Spectral, FlatOperatorAnnihilatesConstants) {
  const DiscreteOperator op = assemble_operator(make_metric("flat-torus"), box(6), 0.0);
  EXPECT_LT(op.constant_annihilation(), 1e-12);
  EXPECT_LT(op.self_adjointness_residual(), 1e-12);
  for (double v : op.potential) EXPECT_EQ(v, 0.0);
}

TEST(Spectral, PerturbedMetricIsSelfAdjoint) {
  const DiscreteOperator op = assemble_operator(make_metric("perturbed-torus"), box(6), 1.0);
  EXPECT_LT(op.self_adjointness_residual(), 1e-10);
  EXPECT_LT(op.constant_annihilation(), 1e-10);
}

TEST(Spectral, ConstantPotentialShiftsSpectrum) {
  for (double c : {0.0, 2.5, -1.5}) {
    const DiscreteOperator op = assemble_operator(make_metric("flat-torus"), box(6), 0.0, constant_potential(c));
    const EigenResult r = principal_eigenpair(op);
    EXPECT_NEAR(r.mu, c, 1e-9);
    EXPECT_LT((r.phi.array() - r.phi.mean()).abs().maxCoeff(), 1e-7 * r.phi.mean());
  }
}

TEST(Spectral, PrincipalEigenvalueMatchesDenseSolver) {
  PotentialHook h;
  h.replace = [](const Point& x) { return std::sin(x[0]); };
  const DiscreteOperator flat = assemble_operator(make_metric("flat-torus"), box(6), 0.0, h);
  EXPECT_NEAR(principal_eigenpair(flat).mu, dense_lowest(flat), 1e-8);
  const DiscreteOperator curved = assemble_operator(make_metric("perturbed-torus"), box(6), 1.0);
  EXPECT_NEAR(principal_eigenpair(curved).mu, dense_lowest(curved), 1e-8);
}

TEST(Spectral, EigenfunctionIsPositiveAndNormalized) {
  const DiscreteOperator op = assemble_operator(make_metric("perturbed-torus"), box(6), 1.0);
  const EigenResult r = principal_eigenpair(op);
  EXPECT_GT(r.phi.minCoeff(), 0.0);
  double s = 0.0;
  for (std::size_t n = 0; n < op.size(); ++n) s += op.mass[n] * r.phi[n] * r.phi[n];
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_LE(r.residual, 1e-9);
}

TEST(Spectral, FlatTorusViolatesBachHypothesis) {
  try {
    sign_trichotomy(make_metric("flat-torus"), box(4), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBachVanishes);
  }
}

TEST(Spectral, TrichotomyClasses) {
  const MetricField g = make_metric("perturbed-torus");
  const DiscreteOperator raw = assemble_operator(g, box(6), 1.0);
  PotentialHook lift;
  lift.shift = 0.5 - *std::min_element(raw.potential.begin(), raw.potential.end());
  const DiscreteOperator op = assemble_operator(g, box(6), 1.0, lift);
  const TrichotomyResult pos = sign_trichotomy(op);
  EXPECT_EQ(pos.sign, SignClass::kPositive);
  EXPECT_GE(pos.eigen.mu, 0.5 - 1e-12);
  PotentialHook shift;
  shift.shift = lift.shift - (pos.eigen.mu + 1.0);
  const TrichotomyResult neg = sign_trichotomy(assemble_operator(g, box(6), 1.0, shift));
  EXPECT_EQ(neg.sign, SignClass::kNegative);
  EXPECT_NEAR(neg.eigen.mu, -1.0, 1e-8);
  EXPECT_LT(neg.law_residual, 1e-6);
}

TEST(Spectral, QuotientIsHomogeneousOfDegreeMinusTwo) {
  const DiscreteOperator op = assemble_operator(make_metric("perturbed-torus"), box(4), 1.0);
  Eigen::VectorXd u(static_cast<Eigen::Index>(op.size()));
  for (std::size_t n = 0; n < op.size(); ++n) u[n] = 1.0 + 0.3 * std::sin(op.grid.node(n)[1]);
  const double y = yamabe_bach_functional(u, op);
  for (double l : {2.0, 3.0}) EXPECT_NEAR(yamabe_bach_functional(l * u, op), y / (l * l), 1e-12 * std::abs(y));
  Eigen::VectorXd v(u.size());
  for (std::size_t n = 0; n < op.size(); ++n) v[n] = std::sin(op.grid.node(n)[0]) + 0.1;
  EXPECT_TRUE(std::isfinite(yamabe_bach_functional(v, op)));
}

TEST(Spectral, NormalizationOfConstantNegativePotential) {
  const DiscreteOperator op = assemble_operator(make_metric("flat-torus"), box(4), 0.0, constant_potential(-2.0));
  const NormalizationReport r = minimize_and_normalize(op);
  EXPECT_LT(r.deviation, 1e-10);
  EXPECT_LT(r.el_residual, 1e-8);
  EXPECT_LT((r.v.array() - std::sqrt(2.0)).abs().maxCoeff(), 1e-8);
}

TEST(Spectral, PositivePotentialCannotBeNormalized) {
  const DiscreteOperator op = assemble_operator(make_metric("flat-torus"), box(4), 0.0, constant_potential(1.0));
  try {
    minimize_and_normalize(op);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kHypothesisFailed);
  }
}

TEST(Spectral, NormalizationOfVaryingNegativePotential) {
  PotentialHook h;
  h.replace = [](const Point& x) { return -1.0 - 0.2 * std::sin(x[0]) + 0.1 * std::cos(x[1] + x[2]); };
  const DiscreteOperator op = assemble_operator(make_metric("perturbed-torus"), box(8), 0.0, h);
  const NormalizationReport r = minimize_and_normalize(op);
  EXPECT_LE(r.el_residual, 1e-8);
  EXPECT_LE(r.deviation, 1e-3);
  EXPECT_TRUE(r.monotone);
  EXPECT_LE(r.final_functional, r.initial_functional + 1e-12);
  EXPECT_LT(r.K, 0.0);
}

TEST(Spectral, ConformalIntegralIdentity) {
  const auto [lhs, rhs] = conformal_integral_identity(make_metric("perturbed-torus"), make_scalar("1+0.2*sin(x1)*cos(x3)"), 0.7, box(8));
  EXPECT_NEAR(lhs, rhs, 1e-8 * std::abs(lhs));
}

TEST(Spectral, TrigonometricDerivative) {
  const ChartGrid g = box(8);
  std::vector<double> f(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) f[n] = std::sin(2.0 * g.node(n)[2]);
  const std::vector<double> d = spectral_derivative(f, g, 2);
  for (std::size_t n = 0; n < g.size(); ++n) EXPECT_NEAR(d[n], 2.0 * std::cos(2.0 * g.node(n)[2]), 1e-12);
}

TEST(Spectral, NonPeriodicMetricIsRejected) {
  try {
    assemble_operator(make_metric("euclidean"), box(4), 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonPeriodicGrid);
  }
}

// The warped torus depends on x1, x2 only, so refining those two axes refines the principal eigenpair.
TEST(Spectral, PrincipalEigenvalueConvergesAtSecondOrder) {
  const MetricField g = make_metric("warped-torus");
  std::vector<double> mu;
  for (int n : {8, 16, 32}) {
    ChartSpec cs;
    cs.extents = {kTwoPi, kTwoPi, kTwoPi, kTwoPi};
    cs.resolution = {n, n, 4, 4};
    mu.push_back(principal_eigenpair(assemble_operator(g, make_chart(cs), 1.0)).mu);
  }
  const double order = std::log2(std::abs(mu[0] - mu[1]) / std::abs(mu[1] - mu[2]));
  EXPECT_GE(order, 2.0) << mu[0] << " " << mu[1] << " " << mu[2];
}
