#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bachgeom/catalog.hpp"
#include "bachgeom/pipeline.hpp"
#include "helpers.hpp"

using namespace bachgeom;
using testing_helpers::ball;

namespace {

const Point kCenter{std::numbers::pi / 2, std::numbers::pi / 2, std::numbers::pi / 2, std::numbers::pi / 2};

}  // namespace

TEST(Profile, EndpointsAndChecks) {
  const double dmax = max_feasible_delta();
  EXPECT_GT(dmax, 0.0);
  for (double d : {dmax, 0.5 * dmax, 0.01}) {
    const BumpProfile y = bump_profile(d);
    EXPECT_NEAR(y.value(0.0), d, 1e-15);
    EXPECT_EQ(y.value(1.0), 1.0);
    EXPECT_EQ(y.value(1.3), 1.0);
    EXPECT_NEAR(y.value(-0.4), y.value(0.4), 1e-15);
    const ProfileReport rep = check_profile(y);
    EXPECT_TRUE(rep.all_pass()) << d;
    EXPECT_EQ(rep.checks.size(), 6u);
  }
}

TEST(Profile, DerivativesMatchDifferenceQuotients) {
  const BumpProfile y = bump_profile(0.05);
  const double h = 1e-5;
  for (double x : {0.2, 0.55, 0.8, 0.97})
    for (int m = 0; m < 4; ++m)
      EXPECT_NEAR(y.derivative(x, m + 1), (y.derivative(x + h, m) - y.derivative(x - h, m)) / (2 * h),
                  1e-5 * (1.0 + std::abs(y.derivative(x, m + 1))));
}

TEST(Profile, SmoothAcrossTheBoundary) {
  const BumpProfile y = bump_profile(0.05);
  for (int m = 1; m <= 3; ++m) EXPECT_NEAR(y.derivative(1.0 - 1e-9, m), 0.0, 1e-10);
  // the fourth derivative vanishes linearly at the boundary
  EXPECT_NEAR(y.derivative(1.0 - 1e-9, 4) / y.derivative(1.0 - 1e-7, 4), 1e-2, 1e-4);
}

TEST(Profile, TooLargeDeltaIsInfeasible) {
  try {
    bump_profile(max_feasible_delta() * 1.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasibleDelta);
  }
}

TEST(Psi, EqualsOneOutsideBalls) {
  const MetricField g = make_metric("perturbed-torus");
  const ScalarField psi = psi_field(bump_profile(0.05), {{kCenter, 0.8}}, g.domain());
  const Point out{0.1, 0.2, 3.0, 4.0};
  EXPECT_EQ(psi.value(out), 1.0);
  const ScalarTaylor j = psi.taylor(out);
  for (int m = 1; m < ScalarTaylor::kSize; ++m) EXPECT_EQ(j.coeff(m), 0.0);
  EXPECT_NEAR(psi.value(kCenter), 0.05, 1e-15);
  EXPECT_EQ(double_deformation(g, psi, 3.0).value(out), g.value(out));
}

TEST(Psi, PeriodicImagesAreUsed) {
  const MetricField g = make_metric("perturbed-torus");
  const Point c{0.1, 0.1, 0.1, 0.1};
  const ScalarField psi = psi_field(bump_profile(0.05), {{c, 0.5}}, g.domain());
  const double two_pi = 2.0 * std::numbers::pi;
  EXPECT_NEAR(psi.value({two_pi - 0.1, 0.1, 0.1, 0.1}), psi.value({0.3, 0.1, 0.1, 0.1}), 1e-14);
}

TEST(DoubleDeformation, Limits) {
  const MetricField g = make_metric("perturbed-torus");
  const Point p{1.3, 1.7, 1.2, 1.9};
  const ScalarField one = ScalarField::constant(1.0);
  EXPECT_LT(testing_helpers::max_diff(double_deformation(g, one, 5.0).value(p), g.value(p)), 1e-15);
  const ScalarField psi = psi_field(bump_profile(0.05), {{kCenter, 0.8}}, g.domain());
  const Mat4 conf = double_deformation(g, psi, 0.0).value(p);
  const Mat4 gv = g.value(p);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(conf[i][j], psi.value(p) * gv[i][j], 1e-15);
}

TEST(DoubleDeformation, TwoRoutesAgree) {
  const MetricField g = make_metric("perturbed-torus");
  const ScalarField psi = psi_field(bump_profile(0.05), {{kCenter, 0.8}}, g.domain());
  const std::vector<Point> pts{{1.3, 1.7, 1.2, 1.9}, {1.6, 1.5, 1.4, 1.8}, {2.0, 1.1, 1.7, 1.5}};
  EXPECT_LE(double_deformation_mismatch(g, psi, 0.7, pts), 1e-10);
  EXPECT_LE(double_deformation_mismatch(g, make_scalar("1.5+0.3*sin(x1)*cos(x2)"), 0.7, pts), 1e-10);
}

TEST(Phi, UndeformedBallGivesBaseIntegral) {
  const MetricField g = make_metric("perturbed-torus");
  const ChartGrid grid = ball(0.8, {24, 4, 4, 4}, kCenter, 4);
  const PhiValues v = evaluate_phi(g, ScalarField::constant(1.0), 10.0, 1.0, grid);
  EXPECT_NEAR(v.direct, v.base, 1e-12 * std::abs(v.base));
  EXPECT_NEAR(v.formula, v.base, 1e-12 * std::abs(v.base));
}

TEST(Phi, SmallKApproachesConformalMetric) {
  const MetricField g = make_metric("sphere4");
  const ScalarField psi = psi_field(bump_profile(0.05), {{{}, 0.8}}, g.domain());
  const ChartGrid grid = ball(0.8, {192, 4, 4, 4}, {}, 12);
  const PhiValues v = evaluate_phi(g, psi, 1e-4, 1.0, grid);
  const MetricField conf = double_deformation(g, psi, 0.0);
  CompensatedSum s;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const MetricTaylor j = conf.taylor(grid.node(n));
    s.add(scalar_bach(j, 1.0).value * std::sqrt(det4(jet_values(j))) * grid.volume_weight(n));
  }
  EXPECT_NEAR(v.direct, s.value(), 1e-5 * (1.0 + std::abs(s.value())));
  EXPECT_LT(v.oracle_residual(), 1e-6);
}

TEST(Phi, FormulaMatchesDirectIntegral) {
  // a radial base resolves the angular integrals exactly
  const MetricField g = make_metric("sphere4");
  const ScalarField psi = psi_field(bump_profile(max_feasible_delta() / 2), {{{}, 0.8}}, g.domain());
  const ChartGrid grid = ball(0.8, {192, 4, 4, 4}, {}, 12);
  for (double k : {1.0, 10.0}) {
    const PhiValues v = evaluate_phi(g, psi, k, 0.0, grid);
    EXPECT_LT(v.oracle_residual(), 1e-6) << k;
  }
}

TEST(SelectK, PicksArgmax) {
  const MetricField g = make_metric("perturbed-torus");
  const ChartGrid grid = ball(0.8, {8, 4, 4, 4}, kCenter);
  const KSelection one = select_k(g, ScalarField::constant(1.0), {2.0, 5.0}, {grid});
  EXPECT_EQ(one.k, 2.0);
  EXPECT_EQ(one.min_bach[0], one.min_bach[1]);
  const ScalarField psi = psi_field(bump_profile(0.05), {{kCenter, 0.8}}, g.domain());
  EXPECT_EQ(select_k(g, psi, {3.0}, {grid}).k, 3.0);
}

TEST(SelectK, DegenerateCandidatesAreReported) {
  const ChartGrid grid = ball(0.5, {8, 4, 4, 4});
  try {
    select_k(make_metric("flat-ball"), ScalarField::constant(1.0), {1.0, 10.0}, {grid});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAllCandidatesDegenerate);
  }
}

TEST(BoundSampler, UndeformedIsConstantInK) {
  const MetricField g = make_metric("perturbed-torus");
  const ChartGrid grid = ball(0.8, {8, 4, 4, 4}, kCenter);
  const BoundTable t = bound_sampler(g, ScalarField::constant(1.0), {kCenter, 0.8}, {1, 10, 100}, grid);
  for (const BoundSample& r : t.rows) EXPECT_NEAR(r.q, t.undeformed_q, 1e-12 * t.undeformed_q);
  EXPECT_TRUE(t.bounded());
  const BoundTable flat = bound_sampler(make_metric("flat-ball"), ScalarField::constant(1.0), {{}, 0.5}, {1, 10},
                                        ball(0.5, {8, 4, 4, 4}));
  for (const BoundSample& r : flat.rows) EXPECT_EQ(r.q, 0.0);
}

TEST(Construction, FlatBallWithSmallNuIsNotNegative) {
  ConstructionParams p;
  p.t = 1.0;
  p.radius = 0.5;
  p.nu = 1.0;
  p.k_candidates = {50.0};
  p.ball_resolution = {48, 4, 4, 4};
  p.bound_ks = {};
  try {
    run_construction(make_metric("flat-ball"), p);
    FAIL();
  } catch (const ConstructionFailure& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPhiNotNegative);
    EXPECT_GT(e.report().phi_value, 0.0);
    EXPECT_EQ(e.report().balls.size(), 1u);
  }
}

TEST(Construction, DefaultBallsFitThePeriod) {
  ConstructionParams p;
  p.radius = 1.2;
  p.nu = 4.0;
  const std::vector<Ball> b = default_balls(make_metric("perturbed-torus"), p);
  EXPECT_EQ(b.size(), 4u);
  p.radius = 3.2;
  EXPECT_THROW(default_balls(make_metric("perturbed-torus"), p), Error);
}
