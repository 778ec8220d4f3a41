#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bachgeom/catalog.hpp"
#include "bachgeom/fields.hpp"
#include "helpers.hpp"

using namespace bachgeom;
using testing_helpers::box;
using testing_helpers::kTwoPi;

TEST(Chart, BoxWeightsSumToVolume) {
  const ChartGrid g = box(8);
  CompensatedSum s;
  for (std::size_t n = 0; n < g.size(); ++n) s.add(g.volume_weight(n));
  EXPECT_NEAR(s.value(), std::pow(kTwoPi, 4), 1e-10);
}

TEST(Chart, BallQuadratureGivesFourBallVolume) {
  for (int panels : {1, 4}) {
    const ChartGrid g = testing_helpers::ball(1.0, {16, 4, 4, 4}, {}, panels);
    CompensatedSum s;
    for (std::size_t n = 0; n < g.size(); ++n) s.add(g.volume_weight(n));
    EXPECT_NEAR(s.value(), std::numbers::pi * std::numbers::pi / 2.0, 1e-10) << panels;
  }
}

TEST(Chart, BallNodesAvoidCenterAndBoundary) {
  const ChartGrid g = testing_helpers::ball(0.5, {24, 4, 4, 4}, {1.0, 2.0, 3.0, 4.0}, 6);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double rho = g.polar(n)[0];
    EXPECT_GT(rho, 0.0);
    EXPECT_LT(rho, 0.5);
    const Point x = g.node(n);
    double d2 = 0.0;
    for (int a = 0; a < 4; ++a) d2 += (x[a] - g.center()[a]) * (x[a] - g.center()[a]);
    EXPECT_NEAR(std::sqrt(d2), rho, 1e-14);
  }
}

TEST(Chart, BallIntegratesPolynomialExactly) {
  // integral of |x|^4 over the unit 4-ball = 2 pi^2 / 8
  const ChartGrid g = testing_helpers::ball(1.0, {12, 4, 4, 4});
  CompensatedSum s;
  for (std::size_t n = 0; n < g.size(); ++n) s.add(std::pow(g.polar(n)[0], 4) * g.volume_weight(n));
  EXPECT_NEAR(s.value(), std::numbers::pi * std::numbers::pi / 4.0, 1e-12);
}

TEST(Chart, TooCoarseResolutionIsInvalid) {
  ChartSpec cs;
  cs.extents = {1, 1, 1, 1};
  cs.resolution = {2, 2, 2, 2};
  try {
    make_chart(cs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidSpec);
  }
}

TEST(Chart, RadialResolutionMustMatchPanels) {
  EXPECT_THROW(testing_helpers::ball(1.0, {10, 4, 4, 4}, {}, 3), Error);
}

TEST(Fields, EuclideanJetIsTrivial) {
  const MetricJet j = jet_of_metric(make_metric("euclidean"), ChartPoint{{0.3, -1.0, 2.0, 0.1}}, 4);
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) {
      EXPECT_EQ(j.g(i, k), i == k ? 1.0 : 0.0);
      for (int a = 0; a < 4; ++a) {
        EXPECT_EQ(j.dg(i, k, a), 0.0);
        for (int b = 0; b < 4; ++b) EXPECT_EQ(j.d2g(i, k, a, b), 0.0);
      }
    }
}

TEST(Fields, ConformallyFlatFirstDerivative) {
  const MetricJet j = jet_of_metric(make_metric("conformal-flat", {{"c", 0.1}}), ChartPoint{{0, 0, 0, 0}}, 4);
  EXPECT_NEAR(j.dg(0, 0, 0), 0.2, 1e-15);
  EXPECT_NEAR(j.dg(1, 1, 0), 0.2, 1e-15);
  EXPECT_NEAR(j.dg(0, 0, 1), 0.0, 1e-15);
}

TEST(Fields, DualNumberUserMetricMatchesCatalog) {
  UserMetricSpec spec;
  spec.components = {"exp(2*c*sin(x1))", "0", "0", "0", "exp(2*c*sin(x1))", "0", "0", "exp(2*c*sin(x1))", "0",
                     "exp(2*c*sin(x1))"};
  spec.params = {{"c", 0.1}};
  const MetricField user = make_user_metric(spec);
  const MetricField cat = make_metric("conformal-flat");
  const Point p{0.7, 1.1, -0.4, 2.0};
  const MetricTaylor a = user.taylor(p), b = cat.taylor(p);
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k)
      for (int m = 0; m < MetricTaylor::value_type::value_type::kSize; ++m)
        EXPECT_NEAR(a[i][k].coeff(m), b[i][k].coeff(m), 1e-13);
}

TEST(Fields, FiniteDifferenceJetTracksAnalytic) {
  UserMetricSpec spec;
  spec.components = {"1+0.1*sin(x2)", "0", "0", "0", "1", "0", "0", "1", "0", "1"};
  spec.provenance = Provenance::kFiniteDifference;
  spec.fd_step = 0.05;
  const MetricField fd = make_user_metric(spec);
  const MetricJet j = jet_of_metric(fd, ChartPoint{{0, 0.4, 0, 0}}, 4);
  EXPECT_NEAR(j.dg(0, 0, 1), 0.1 * std::cos(0.4), 1e-8);
  EXPECT_NEAR(j.d2g(0, 0, 1, 1), -0.1 * std::sin(0.4), 1e-6);
}

TEST(Fields, InconsistentFiniteDifferenceJetIsRejected) {
  UserMetricSpec spec;
  spec.components = {"1+0.5*sin(40*x1)", "0", "0", "0", "1", "0", "0", "1", "0", "1"};
  spec.provenance = Provenance::kFiniteDifference;
  spec.fd_step = 0.2;
  try {
    jet_of_metric(make_user_metric(spec), ChartPoint{{0.3, 0, 0, 0}}, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kJetInconsistent);
  }
}

TEST(Fields, IndefiniteMetricIsRejected) {
  UserMetricSpec spec;
  spec.components = {"-1", "0", "0", "0", "1", "0", "0", "1", "0", "1"};
  try {
    jet_of_metric(make_user_metric(spec), ChartPoint{{0, 0, 0, 0}}, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPdViolation);
  }
}

TEST(Fields, UnknownMetricIsReported) {
  try {
    make_metric("no-such-metric");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownMetric);
  }
}

TEST(Integrate, ConstantOnBox) {
  EXPECT_NEAR(integrate(ScalarField::constant(1.0), box(6), make_metric("euclidean")), std::pow(kTwoPi, 4), 1e-9);
}

TEST(Integrate, ScaledMetricOnUnitBox) {
  UserMetricSpec spec;
  spec.components = {"4", "0", "0", "0", "4", "0", "0", "4", "0", "4"};
  spec.domain = ChartDomain::periodic_box({1, 1, 1, 1});
  EXPECT_NEAR(integrate(ScalarField::constant(1.0), box(4, 1.0), make_user_metric(spec)), 16.0, 1e-13);
}

TEST(Integrate, SineSquaredIsExact) {
  const ScalarField f = make_scalar("sin(x1)^2");
  EXPECT_NEAR(integrate(f, box(8), make_metric("euclidean")), std::pow(kTwoPi, 4) / 2.0, 1e-12 * std::pow(kTwoPi, 4));
}

TEST(Taylor, ProductAndDerivative) {
  using T = Taylor<4>;
  const T x = T::variable(0, 0.5), y = T::variable(1, -0.2);
  const T f = sin(x) * exp(y);
  EXPECT_NEAR(f.derivative({2, 1, 0, 0}), -std::sin(0.5) * std::exp(-0.2), 1e-15);
  EXPECT_NEAR(f.derivative({1, 3, 0, 0}), std::cos(0.5) * std::exp(-0.2), 1e-15);
}

TEST(Taylor, LinearSubstitutionMatchesComposition) {
  using T = Taylor<5>;
  const double c = std::cos(0.3), s = std::sin(0.3);
  const std::array<std::array<double, 4>, 4> q{{{c, -s, 0, 0}, {s, c, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}};
  const auto xs = coordinate_jets<5>(Point{0.2, 0.4, 0.0, 0.0});
  const T f = sin(xs[0]) * cos(xs[1] + 2.0 * xs[0]);
  const T h = linear_substitute(f, q);
  // h(y) = f(Q y) around the same base point expressed in y
  std::array<T, 4> ys;
  for (int i = 0; i < 4; ++i) ys[i] = T::variable(i, 0.0);
  std::array<T, 4> mapped;
  for (int i = 0; i < 4; ++i) {
    mapped[i] = T(xs[i].value());
    for (int j = 0; j < 4; ++j) mapped[i] += q[i][j] * ys[j];
  }
  const T direct = sin(mapped[0]) * cos(mapped[1] + 2.0 * mapped[0]);
  for (int m = 0; m < T::kSize; ++m) EXPECT_NEAR(h.coeff(m), direct.coeff(m), 1e-14);
}
