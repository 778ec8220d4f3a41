#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bachgeom/catalog.hpp"
#include "bachgeom/conformal.hpp"
#include "helpers.hpp"

using namespace bachgeom;
using testing_helpers::max_abs;

namespace {

const Point kP{0.9, 1.4, 2.3, 5.2};

}  // namespace

TEST(Conformal, TrivialFactorsLeaveMetric) {
  const MetricField g = make_metric("perturbed-torus");
  const MetricField a = conformal_metric(g, {ScalarField::constant(0.0), ConformalConvention::kExponential});
  const MetricField b = conformal_metric(g, {ScalarField::constant(1.0), ConformalConvention::kPower});
  EXPECT_EQ(testing_helpers::max_diff(a.value(kP), g.value(kP)), 0.0);
  EXPECT_EQ(testing_helpers::max_diff(b.value(kP), g.value(kP)), 0.0);
}

TEST(Conformal, ExponentialJetMatchesClosedForm) {
  const MetricField a = conformal_metric(make_metric("euclidean"), {make_scalar("0.1*sin(x1)"), ConformalConvention::kExponential});
  const MetricField b = make_metric("conformal-flat", {{"c", 0.1}});
  const MetricTaylor ja = a.taylor(kP), jb = b.taylor(kP);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int m = 0; m < MetricTaylor::value_type::value_type::kSize; ++m) EXPECT_NEAR(ja[i][j].coeff(m), jb[i][j].coeff(m), 1e-12);
}

TEST(Conformal, CurvatureLaws) {
  const ConformalLaws one = conformal_curvature_laws(make_metric("perturbed-torus"), ScalarField::constant(1.0), ChartPoint{kP});
  EXPECT_LT(one.residual, 1e-14);
  EXPECT_NEAR(one.scalar_closed, one.scalar_direct, 1e-14);
  const ConformalLaws l =
      conformal_curvature_laws(make_metric("conformal-s2s2"), make_scalar("1+0.2*sin(x1)"), ChartPoint{{1.0, 0.4, 2.0, 3.0}});
  EXPECT_LT(l.residual, 1e-9);
}

TEST(Conformal, ScalarBach) {
  EXPECT_EQ(scalar_bach(make_metric("euclidean"), ChartPoint{kP}, 3.0).value, 0.0);
  const MixedCurvatureScalar s = scalar_bach(make_metric("product-s2s2"), ChartPoint{{1.0, 0.2, 2.0, 0.1}}, 5.0);
  EXPECT_NEAR(s.value, 4.0, 1e-4);
  EXPECT_NEAR(s.scalar, 4.0, 1e-12);
}

TEST(Conformal, ModifiedLaplacianExamples) {
  const MetricField e = make_metric("euclidean");
  EXPECT_EQ(modified_laplacian_apply(e, 1.0, ScalarField::constant(1.0), ChartPoint{kP}), 0.0);
  EXPECT_NEAR(modified_laplacian_apply(e, 2.0, make_scalar("sin(x1)"), ChartPoint{kP}), 6.0 * std::sin(kP[0]), 1e-14);
  const MetricField g = make_metric("perturbed-torus");
  EXPECT_NEAR(modified_laplacian_apply(g, 0.7, ScalarField::constant(1.0), ChartPoint{kP}),
              scalar_bach(g, ChartPoint{kP}, 0.7).value, 1e-12);
}

TEST(Conformal, ModifiedLaplacianCovariance) {
  const MetricField cf = make_metric("conformal-flat");
  const CovarianceResidual r = covariance_residual(cf, make_scalar("1+0.3*sin(x2)"), 2.0, make_scalar("1+0.1*cos(x3)"), ChartPoint{kP});
  EXPECT_LT(r.value() / r.scale, 1e-6);
  const CovarianceResidual one = covariance_residual(cf, ScalarField::constant(1.0), 2.0, make_scalar("2+sin(x1)"), ChartPoint{kP});
  EXPECT_LT(one.value(), 1e-13);
  for (const char* name : {"perturbed-torus", "conformal-flat"}) {
    const CovarianceResidual z =
        covariance_residual(make_metric(name), make_scalar("1+0.2*sin(x1+x4)"), 0.0, make_scalar("1+0.1*sin(x2)"), ChartPoint{kP});
    EXPECT_LT(z.value() / z.scale, 1e-8) << name;
  }
}

TEST(Conformal, BachCovariance) {
  const MetricField s2 = make_metric("product-s2s2", {{"a", 1.0}, {"b", 2.0}});
  const ChartPoint p{{1.0, 0.4, 2.0, 3.0}};
  const BachCovarianceResidual r = bach_covariance_residual(s2, {make_scalar("0.1*cos(x1)"), ConformalConvention::kExponential}, p);
  EXPECT_LT(r.component_rel, 1e-6);
  EXPECT_LT(r.norm_rel, 1e-6);
  const BachCovarianceResidual zero = bach_covariance_residual(s2, {ScalarField::constant(0.0), ConformalConvention::kExponential}, p);
  EXPECT_LT(zero.component_abs, 1e-14);
  const BachCovarianceResidual flat =
      bach_covariance_residual(make_metric("product-s2s2"), {make_scalar("0.3*sin(x2)*cos(x1)"), ConformalConvention::kExponential}, p);
  EXPECT_LT(flat.component_abs, 1e-8);
  const BachCovarianceResidual pw =
      bach_covariance_residual(make_metric("perturbed-torus"), {make_scalar("1.2+0.2*sin(x3)"), ConformalConvention::kPower}, ChartPoint{kP});
  EXPECT_LT(pw.component_rel, 1e-6);
}

TEST(Conformal, NonPositivePowerFactorIsRejected) {
  try {
    conformal_metric(make_metric("euclidean"), {make_scalar("sin(x1)"), ConformalConvention::kPower}).taylor(Point{-1.0, 0, 0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFactorNotPositive);
  }
}
