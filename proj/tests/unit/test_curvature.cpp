#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "../oracles/frozen_oracles.hpp"
#include "bachgeom/catalog.hpp"
#include "bachgeom/conformal.hpp"
#include "bachgeom/curvature.hpp"
#include "helpers.hpp"

using namespace bachgeom;
using testing_helpers::max_abs;
using testing_helpers::max_diff;

namespace {

CurvatureBundle bundle(const std::string& name, const Point& p, const Params& params = {}) {
  return curvature_bundle(jet_of_metric(make_metric(name, params), ChartPoint{p}, 4));
}

Mat4 from_array(const double (&a)[4][4]) {
  Mat4 m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m[i][j] = a[i][j];
  return m;
}

}  // namespace

TEST(Curvature, EuclideanIsFlat) {
  const CurvatureBundle b = bundle("euclidean", {0.1, 0.2, 0.3, 0.4});
  EXPECT_EQ(b.scalar, 0.0);
  EXPECT_EQ(max_abs(b.ricci), 0.0);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(max_abs(b.gamma[k]), 0.0);
  EXPECT_EQ(max_abs(bach_ricci_form(make_metric("euclidean"), ChartPoint{}).b), 0.0);
  EXPECT_EQ(max_abs(bach_weyl_form(make_metric("euclidean"), ChartPoint{}).b), 0.0);
}

TEST(Curvature, ChristoffelOfLinearConformalFactor) {
  UserMetricSpec spec;
  spec.components = {"exp(2*c*x1)", "0", "0", "0", "exp(2*c*x1)", "0", "0", "exp(2*c*x1)", "0", "exp(2*c*x1)"};
  spec.params = {{"c", 0.3}};
  const ChristoffelData cd = christoffel(jet_of_metric(make_user_metric(spec), ChartPoint{{0.4, 0, 0, 0}}, 2));
  EXPECT_NEAR(cd.gamma[0][0][0], 0.3, 1e-14);
  EXPECT_NEAR(cd.gamma[0][1][1], -0.3, 1e-14);
  EXPECT_NEAR(cd.gamma[1][0][1], 0.3, 1e-14);
}

TEST(Curvature, RoundFourSphere) {
  const CurvatureBundle b = bundle("sphere4", {0.3, -0.2, 0.5, 0.1});
  EXPECT_NEAR(b.scalar, 12.0, 1e-11);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(b.ricci[i][j], 3.0 * b.g[i][j], 1e-11);
  EXPECT_NEAR(tensor_norm(b.ricci, b.ginv), 6.0, 1e-11);
  EXPECT_NEAR(tensor_norm(b.weyl, b.ginv), 0.0, 1e-11);
  EXPECT_NEAR(tensor_norm(b.g, b.ginv), 2.0, 1e-14);
  EXPECT_LT(max_abs(bach_weyl_form(make_metric("sphere4"), ChartPoint{{0.3, -0.2, 0.5, 0.1}}).b), 1e-10);
}

TEST(Curvature, UnitProductOfSpheres) {
  const CurvatureBundle b = bundle("product-s2s2", {1.0, 0.3, 2.0, 1.1});
  EXPECT_NEAR(b.scalar, 4.0, 1e-12);
  EXPECT_LT(max_diff(b.ricci, b.g), 1e-12);
  const double w = tensor_norm(b.weyl, b.ginv);
  EXPECT_NEAR(w * w, 16.0 / 3.0, 1e-11);
  EXPECT_LT(max_abs(bach_ricci_form(make_metric("product-s2s2"), ChartPoint{{1.0, 0.3, 2.0, 1.1}}).b), 1e-10);
}

TEST(Curvature, RiemannSymmetries) {
  const CurvatureBundle b = bundle("perturbed-torus", {0.4, 1.3, 2.2, 5.1});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
          const double r = b.riemann[i][j][k][l];
          EXPECT_NEAR(r, -b.riemann[j][i][k][l], 1e-13);
          EXPECT_NEAR(r, b.riemann[k][l][i][j], 1e-13);
          EXPECT_NEAR(r + b.riemann[i][k][l][j] + b.riemann[i][l][j][k], 0.0, 1e-13);
        }
}

TEST(Curvature, WeylIsTraceFree) {
  const CurvatureBundle b = bundle("conformal-s2s2", {1.2, 0.4, 0.8, 2.0});
  for (int j = 0; j < 4; ++j)
    for (int l = 0; l < 4; ++l) {
      double tr = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) tr += b.ginv[i][k] * b.weyl[i][j][k][l];
      EXPECT_NEAR(tr, 0.0, 1e-12);
    }
}

TEST(Curvature, BachMatchesIndependentTable) {
  const MetricField g = make_metric("product-s2s2", {{"a", 1.0}, {"b", 2.0}});
  const double (*tables[])[4] = {oracle::kS2S2Bach0, oracle::kS2S2Bach1, oracle::kS2S2Bach2};
  for (int n = 0; n < 3; ++n) {
    const Point p{oracle::kS2S2Points[n][0], oracle::kS2S2Points[n][1], oracle::kS2S2Points[n][2],
                  oracle::kS2S2Points[n][3]};
    Mat4 ref;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) ref[i][j] = tables[n][i][j];
    const Mat4 br = bach_ricci_form(g, ChartPoint{p}).b;
    const Mat4 bw = bach_weyl_form(g, ChartPoint{p}).b;
    EXPECT_LT(max_diff(br, ref) / max_abs(ref), 1e-6);
    EXPECT_LT(max_diff(bw, ref) / max_abs(ref), 1e-6);
    EXPECT_NEAR(point_curvature(g.taylor(p)).bach_norm, oracle::kS2S2BachNorm[n], 1e-6);
    const MixedCurvatureScalar fb = scalar_bach(g, ChartPoint{p}, 1.0);
    EXPECT_NEAR(fb.value, 2.5 + std::sqrt(oracle::kS2S2BachNorm[n]), 1e-6);
  }
}

TEST(Curvature, BachIsTraceFreeAndSymmetric) {
  const MetricField g = make_metric("perturbed-torus");
  const Point p{0.9, 2.1, 4.4, 0.3};
  const PointCurvature c = point_curvature(g.taylor(p));
  double tr = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      tr += c.ginv[i][j] * c.bach[i][j];
      EXPECT_NEAR(c.bach[i][j], c.bach[j][i], 1e-13);
    }
  EXPECT_NEAR(tr, 0.0, 1e-12);
  EXPECT_GT(c.bach_norm, 1e-6);
}

TEST(Curvature, TensorNormOfZero) {
  EXPECT_EQ(tensor_norm(Mat4{}, identity_mat()), 0.0);
  EXPECT_EQ(tensor_norm(std::vector<double>(64, 0.0), 3, identity_mat()), 0.0);
}

TEST(Curvature, RankMismatchIsReported) {
  try {
    tensor_norm(std::vector<double>(10, 0.0), 2, identity_mat());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRankMismatch);
  }
}

TEST(Curvature, FiniteDifferenceBachAgreesWithAnalytic) {
  UserMetricSpec spec;
  spec.components = {"1", "0", "0", "0", "sin(x1)^2", "0", "0", "4", "0", "4*sin(x3)^2"};
  spec.provenance = Provenance::kFiniteDifference;
  spec.fd_step = 0.05;
  JetOptions jo;
  jo.fd_tol = 1e-3;
  const Point p{1.0, 0.3, 2.0, 1.1};
  const Mat4 fd = bach_ricci_form(make_user_metric(spec), ChartPoint{p}, jo).b;
  EXPECT_LT(max_diff(fd, from_array(oracle::kS2S2Bach0)), 1e-4);
}
