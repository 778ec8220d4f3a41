#include <gtest/gtest.h>

#include <cmath>

#include "../oracles/frozen_oracles.hpp"
#include "bachgeom/aubin.hpp"
#include "bachgeom/catalog.hpp"
#include "helpers.hpp"

using namespace bachgeom;
using testing_helpers::box;
using testing_helpers::max_abs;
using testing_helpers::max_diff;

namespace {

const Point kP{0.7, 1.9, 3.1, 4.6};

}  // namespace

TEST(Aubin, ConstantFunctionLeavesMetric) {
  const MetricField g = make_metric("perturbed-torus");
  const DeformationSpec spec{ScalarField::constant(2.5), 3.0, "c"};
  const MetricTaylor a = g.taylor(kP), b = deform_metric(g, spec).taylor(kP);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int m = 0; m < MetricTaylor::value_type::value_type::kSize; ++m) EXPECT_EQ(a[i][j].coeff(m), b[i][j].coeff(m));
  const DeformedCurvature dc = deformed_curvature_closed(g, spec, ChartPoint{kP});
  EXPECT_EQ(dc.H, 0.0);
  EXPECT_EQ(max_abs(dc.F), 0.0);
  EXPECT_EQ(max_abs(bach_error(g, spec, ChartPoint{kP})), 0.0);
}

TEST(Aubin, LinearFunctionOnEuclideanIsFlat) {
  const MetricField e = make_metric("euclidean");
  const DeformationSpec spec{make_scalar("0.5*x1"), 1.0, "lin"};
  const Mat4 gb = deform_metric(e, spec).value(kP);
  EXPECT_NEAR(gb[0][0], 1.25, 1e-15);
  const DeformedCurvature dc = deformed_curvature_closed(e, spec, ChartPoint{kP});
  EXPECT_NEAR(dc.inv_bar[0][0], 1.0 / 1.25, 1e-15);
  EXPECT_NEAR(dc.vol_ratio, std::sqrt(1.25), 1e-15);
  EXPECT_EQ(max_abs(dc.ricci_closed), 0.0);
  EXPECT_EQ(dc.scalar_closed, 0.0);
  EXPECT_LT(max_abs(bach_error(e, spec, ChartPoint{kP})), 1e-14);
}

TEST(Aubin, DeformedJetMatchesDirectComposition) {
  const MetricField e = make_metric("euclidean");
  const DeformationSpec spec{make_scalar("0.3*sin(x1+x2)"), 1.0, "f"};
  // gbar = delta + 0.09 cos^2(x1+x2) (e1 + e2)(e1 + e2)
  UserMetricSpec u;
  const std::string h = "0.09*cos(x1+x2)^2";
  u.components = {"1+" + h, h, "0", "0", "1+" + h, "0", "0", "1", "0", "1"};
  const MetricTaylor a = deform_metric(e, spec).taylor(kP), b = make_user_metric(u).taylor(kP);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int m = 0; m < MetricTaylor::value_type::value_type::kSize; ++m)
        EXPECT_NEAR(a[i][j].coeff(m), b[i][j].coeff(m), 1e-12);
}

TEST(Aubin, InverseAndVolume) {
  const MetricField g = make_metric("conformal-s2s2");
  const DeformationSpec spec{make_scalar("0.4*sin(x1)*cos(x2)+0.2*x4"), 1.7, "f"};
  const Point p{1.1, 0.5, 2.0, 3.0};
  const MetricJet jet = jet_of_metric(g, ChartPoint{p}, 4);
  const InverseAndVolume iv = deformed_inverse_and_volume(jet, scaled(spec.f, spec.k).taylor(p));
  EXPECT_LT(iv.identity_residual, 1e-12);
  const Mat4 gb = deform_metric(g, spec).value(p);
  EXPECT_NEAR(iv.vol_ratio, std::sqrt(det4(gb) / det4(jet.values())), 1e-12);
}

TEST(Aubin, ClosedFormMatchesDirectCurvature) {
  for (const char* name : {"euclidean", "perturbed-torus", "conformal-flat"}) {
    const MetricField g = make_metric(name);
    const DeformationSpec spec{make_scalar("0.3*sin(x1)*cos(x2)+0.1*cos(x3-x4)"), 1.3, "f"};
    const MetricField gb = deform_metric(g, spec);
    const DeformedCurvature dc = deformed_curvature_closed(g, spec, ChartPoint{kP});
    const CurvatureBundle direct = curvature_bundle(jet_of_metric(gb, ChartPoint{kP}, 4));
    EXPECT_LT(max_diff(dc.ricci_closed, direct.ricci) / (1.0 + max_abs(direct.ricci)), 1e-10) << name;
    EXPECT_NEAR(dc.scalar_closed, direct.scalar, 1e-10 * (1.0 + std::abs(direct.scalar))) << name;
    double rd = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) rd = std::max(rd, max_diff(dc.riemann_closed[i][j], direct.riemann[i][j]));
    EXPECT_LT(rd, 1e-10) << name;
  }
}

TEST(Aubin, BachErrorMatchesIndependentValues) {
  const MetricField e = make_metric("euclidean");
  const Mat4 flat = bach_error(e, {make_scalar("0.3*sin(x1+x2)"), 1.0, "f"}, ChartPoint{{1.5707963267948966, 0, 0, 0}});
  EXPECT_LT(max_abs(flat), 1e-12);
  const Mat4 curved = bach_error(e, {make_scalar("0.3*sin(x1)*cos(x2)"), 1.0, "f"}, ChartPoint{{0.4, 0.7, 0, 0}});
  Mat4 ref;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) ref[i][j] = oracle::kAubinBachErrorCurved[i][j];
  EXPECT_LT(max_diff(curved, ref) / max_abs(ref), 1e-9);
}

TEST(Aubin, ConformalErrorScaling) {
  const MetricField e = make_metric("euclidean");
  EXPECT_LT(conformal_error_scaling_check(e, make_scalar("1+0.2*sin(x1)"), 0.5, ChartPoint{kP}), 1e-6);
  EXPECT_LT(conformal_error_scaling_check(e, ScalarField::constant(1.0), 0.8, ChartPoint{kP}), 1e-13);
  EXPECT_LT(conformal_error_scaling_check(make_metric("perturbed-torus"), make_scalar("1+0.2*sin(x1)*cos(x3)"), 0.0,
                                          ChartPoint{kP}),
            1e-14);
}

TEST(Aubin, ScalarIntegralIdentity) {
  const ChartGrid grid = box(8);
  const auto [flat_l, flat_r] = scalar_integral_identity(make_metric("flat-torus"), {make_scalar("0.3*sin(x1)"), 1.0, "f"}, grid);
  EXPECT_NEAR(flat_l, 0.0, 1e-9);
  EXPECT_NEAR(flat_r, 0.0, 1e-9);
  const MetricField g = make_metric("perturbed-torus");
  const auto [cl, cr] = scalar_integral_identity(g, {ScalarField::constant(1.0), 1.0, "c"}, grid);
  EXPECT_NEAR(cl, cr, 1e-12 * (1.0 + std::abs(cl)));
}

TEST(Aubin, IdentityNeedsClosedChart) {
  try {
    scalar_integral_identity(make_metric("euclidean"), {make_scalar("x1"), 1.0, "f"}, box(4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonPeriodicGrid);
  }
}
