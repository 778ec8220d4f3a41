#include "bachgeom/catalog.hpp"

#include <cmath>
#include <numbers>

namespace bachgeom {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class T>
using M = std::array<std::array<T, kDim>, kDim>;

template <class T>
M<T> diagonal(const T& a, const T& b, const T& c, const T& d) {
  M<T> m;
  for (auto& row : m) row.fill(T(0.0));
  m[0][0] = a;
  m[1][1] = b;
  m[2][2] = c;
  m[3][3] = d;
  return m;
}

template <class T>
M<T> scaled_identity(const T& s) {
  return diagonal(s, s, s, s);
}

Params merge(const std::string& name, const Params& defaults, const Params& given) {
  Params p = defaults;
  for (const auto& [k, v] : given) {
    if (!defaults.count(k)) fail(ErrorCode::kInvalidArgument, "metric '" + name + "' has no parameter '" + k + "'");
    p[k] = v;
  }
  return p;
}

ChartDomain torus(double side) { return ChartDomain::periodic_box({side, side, side, side}); }

}  // namespace

const std::vector<CatalogEntry>& metric_catalog() {
  static const std::vector<CatalogEntry> entries{
      {"euclidean", "flat metric on R^4", {}},
      {"flat-torus", "flat metric on the periodic box of side `side`", {{"side", kTwoPi}}},
      {"flat-ball", "flat metric, intended for polar-ball charts", {}},
      {"sphere4", "round 4-sphere of radius R in stereographic coordinates", {{"R", 1.0}}},
      {"product-s2s2", "S2(a) x S2(b) in (theta1, phi1, theta2, phi2)", {{"a", 1.0}, {"b", 1.0}}},
      {"conformal-flat", "exp(2u) delta on the (2pi)^4 torus, u = c sin x1", {{"c", 0.1}}},
      {"perturbed-torus", "delta + eps h(x) on the (2pi)^4 torus, h trigonometric", {{"eps", 0.1}}},
      {"warped-torus", "delta + eps h(x1, x2) on the (2pi)^4 torus", {{"eps", 0.2}}},
      {"conformal-s2s2", "exp(2 c cos x1) times S2(a) x S2(b)", {{"a", 1.0}, {"b", 2.0}, {"c", 0.1}}},
      {"polar-test", "d rho^2 + (delta + rho^2 a(rho, y)) on (rho, y1, y2, y3)", {{"s", 1.0}}},
  };
  return entries;
}

MetricField make_metric(const std::string& name, const Params& given) {
  const CatalogEntry* entry = nullptr;
  for (const auto& e : metric_catalog())
    if (e.name == name) entry = &e;
  if (!entry) fail(ErrorCode::kUnknownMetric, "unknown metric '" + name + "'");
  const Params p = merge(name, entry->defaults, given);
  auto get = [&p](const char* k) { return p.at(k); };

  if (name == "euclidean" || name == "flat-ball") {
    return make_analytic_metric(name, ChartDomain::whole_space(), [](const auto& x) {
      using T = std::decay_t<decltype(x[0])>;
      return scaled_identity(T(1.0));
    });
  }
  if (name == "flat-torus") {
    const double side = get("side");
    if (!(side > 0.0)) fail(ErrorCode::kInvalidArgument, "flat-torus side must be positive");
    return make_analytic_metric(name, torus(side), [](const auto& x) {
      using T = std::decay_t<decltype(x[0])>;
      return scaled_identity(T(1.0));
    });
  }
  if (name == "sphere4") {
    const double R = get("R");
    if (!(R > 0.0)) fail(ErrorCode::kInvalidArgument, "sphere4 radius must be positive");
    return make_analytic_metric(name, ChartDomain::whole_space(), [R](const auto& x) {
      const auto r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
      const auto d = 1.0 + r2;
      return scaled_identity(4.0 * R * R / (d * d));
    });
  }
  if (name == "product-s2s2" || name == "conformal-s2s2") {
    const double a = get("a"), b = get("b");
    const double c = name == "conformal-s2s2" ? get("c") : 0.0;
    if (!(a > 0.0) || !(b > 0.0)) fail(ErrorCode::kInvalidArgument, "sphere radii must be positive");
    ChartDomain d;
    d.lo = {0.0, 0.0, 0.0, 0.0};
    d.hi = {std::numbers::pi, kTwoPi, std::numbers::pi, kTwoPi};
    d.periodic = {false, true, false, true};
    return make_analytic_metric(name, d, [a, b, c](const auto& x) {
      using std::cos;
      using std::exp;
      using std::sin;
      const auto s1 = sin(x[0]), s2 = sin(x[2]);
      auto m = diagonal(a * a + 0.0 * x[0], a * a * s1 * s1, b * b + 0.0 * x[0], b * b * s2 * s2);
      if (c != 0.0) {
        const auto f = exp(2.0 * c * cos(x[0]));
        for (int i = 0; i < kDim; ++i) m[i][i] = f * m[i][i];
      }
      return m;
    });
  }
  if (name == "conformal-flat") {
    const double c = get("c");
    return make_analytic_metric(name, torus(kTwoPi), [c](const auto& x) {
      using std::exp;
      using std::sin;
      return scaled_identity(exp(2.0 * c * sin(x[0])));
    });
  }
  if (name == "perturbed-torus") {
    const double eps = get("eps");
    return make_analytic_metric(name, torus(kTwoPi), [eps](const auto& x) {
      using std::cos;
      using std::sin;
      auto m = diagonal(1.0 + eps * sin(x[1] + x[2]), 1.0 + eps * cos(x[2] - x[3]),
                        1.0 + eps * sin(x[3] + x[0]), 1.0 + eps * cos(x[0] + x[1]));
      const auto h01 = 0.5 * eps * sin(x[2] + x[3]);
      const auto h02 = 0.5 * eps * cos(x[1] - x[3]);
      const auto h13 = 0.5 * eps * sin(x[0] - x[2]);
      const auto h23 = 0.5 * eps * cos(x[0] + x[1]);
      m[0][1] = m[1][0] = h01;
      m[0][2] = m[2][0] = h02;
      m[1][3] = m[3][1] = h13;
      m[2][3] = m[3][2] = h23;
      return m;
    });
  }
  if (name == "warped-torus") {
    const double eps = get("eps");
    return make_analytic_metric(name, torus(kTwoPi), [eps](const auto& x) {
      using std::cos;
      using std::sin;
      auto m = diagonal(1.0 + eps * sin(x[1]), 1.0 + eps * cos(x[0]), 1.0 + eps * sin(x[0] + x[1]),
                        1.0 + eps * cos(x[0] - x[1]));
      m[2][3] = m[3][2] = 0.5 * eps * sin(x[0]);
      return m;
    });
  }
  if (name == "polar-test") {
    const double s = get("s");
    ChartDomain d;
    d.lo = {0.0, -1e300, -1e300, -1e300};
    d.hi = {2.0, 1e300, 1e300, 1e300};
    return make_analytic_metric(name, d, [s](const auto& x) {
      using std::cos;
      using std::sin;
      const auto& rho = x[0];
      const auto r2 = rho * rho;
      auto m = diagonal(1.0 + 0.0 * rho, 1.0 + r2 * s * (0.3 + 0.1 * rho * cos(x[2])), 1.0 + r2 * s * 0.2 * rho,
                        1.0 + r2 * s * (0.1 + 0.1 * sin(x[1])));
      m[1][2] = m[2][1] = r2 * s * 0.05 * sin(x[3]);
      m[2][3] = m[3][2] = r2 * s * 0.04 * rho * rho;
      return m;
    });
  }
  fail(ErrorCode::kUnknownMetric, "unknown metric '" + name + "'");
}

MetricField make_user_metric(const UserMetricSpec& spec) {
  std::array<Expression, 10> e;
  for (int n = 0; n < 10; ++n) e[n] = Expression::parse(spec.components[n].empty() ? "0" : spec.components[n], spec.params);
  static constexpr int kRow[10] = {0, 0, 0, 0, 1, 1, 1, 2, 2, 3};
  static constexpr int kCol[10] = {0, 1, 2, 3, 1, 2, 3, 2, 3, 3};
  auto value = [e](const Point& p) {
    Mat4 m{};
    for (int n = 0; n < 10; ++n) m[kRow[n]][kCol[n]] = m[kCol[n]][kRow[n]] = e[n].evaluate(p);
    return m;
  };
  if (spec.provenance == Provenance::kFiniteDifference)
    return MetricField::finite_difference(spec.label, spec.domain, value, spec.fd_step);
  auto taylor = [e](const Point& p) {
    const auto x = coordinate_jets<kMetricOrder>(p);
    MetricTaylor m;
    for (int n = 0; n < 10; ++n) m[kRow[n]][kCol[n]] = m[kCol[n]][kRow[n]] = e[n].evaluate(x);
    return m;
  };
  return MetricField::analytic(spec.label, spec.domain, taylor, value, Provenance::kDualNumber);
}

ScalarField make_scalar(const std::string& expression, const Params& params) {
  const Expression e = Expression::parse(expression, params);
  return ScalarField(
      expression, [e](const Point& p) { return e.evaluate(coordinate_jets<kScalarOrder>(p)); },
      [e](const Point& p) { return e.evaluate(p); });
}

}  // namespace bachgeom
