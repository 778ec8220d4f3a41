#include "bachgeom/fields.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bachgeom {

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kCatalogAnalytic: return "catalog-analytic";
    case Provenance::kDualNumber: return "dual-number";
    case Provenance::kFiniteDifference: return "finite-difference";
  }
  return "unknown";
}

ChartDomain ChartDomain::whole_space() {
  ChartDomain d;
  const double inf = std::numeric_limits<double>::infinity();
  d.lo.fill(-inf);
  d.hi.fill(inf);
  return d;
}

ChartDomain ChartDomain::periodic_box(const std::array<double, kDim>& sides) {
  ChartDomain d;
  for (int a = 0; a < kDim; ++a) {
    d.lo[a] = 0.0;
    d.hi[a] = sides[a];
    d.periodic[a] = true;
  }
  return d;
}

ChartDomain ChartDomain::open_box(const Point& lo, const Point& hi) {
  ChartDomain d;
  d.lo = lo;
  d.hi = hi;
  return d;
}

bool ChartDomain::contains(const Point& p) const {
  for (int a = 0; a < kDim; ++a) {
    if (!std::isfinite(p[a])) return false;
    if (!periodic[a] && (p[a] < lo[a] || p[a] > hi[a])) return false;
  }
  return true;
}

Point ChartDomain::canonical(const Point& p) const {
  if (!contains(p)) {
    std::ostringstream os;
    os << "point (" << p[0] << ", " << p[1] << ", " << p[2] << ", " << p[3] << ") outside chart";
    fail(ErrorCode::kPointOutsideChart, os.str());
  }
  Point q = p;
  for (int a = 0; a < kDim; ++a) {
    if (!periodic[a]) continue;
    const double L = hi[a] - lo[a];
    q[a] = lo[a] + std::fmod(p[a] - lo[a], L);
    if (q[a] < lo[a]) q[a] += L;
    if (q[a] >= hi[a]) q[a] = lo[a];
  }
  return q;
}

MetricJet::MetricJet(const Point& p, const MetricTaylor& g, int order) : point_(p), g_(g), order_(order) {
  const int keep = taylor_size(order);
  for (auto& row : g_)
    for (auto& e : row)
      for (int k = keep; k < Taylor<kMetricOrder>::kSize; ++k) e.coeffs()[k] = 0.0;
}

double MetricJet::partial(int i, int j, const MultiIndex& alpha) const {
  const int deg = alpha[0] + alpha[1] + alpha[2] + alpha[3];
  if (deg > order_)
    fail(ErrorCode::kInsufficientJetOrder,
         "derivative of order " + std::to_string(deg) + " requested from a jet of order " +
             std::to_string(order_));
  return g_[i][j].derivative(alpha);
}

double MetricJet::dg(int i, int j, int a) const {
  MultiIndex m{};
  ++m[a];
  return partial(i, j, m);
}

double MetricJet::d2g(int i, int j, int a, int b) const {
  MultiIndex m{};
  ++m[a];
  ++m[b];
  return partial(i, j, m);
}

double MetricJet::d3g(int i, int j, int a, int b, int c) const {
  MultiIndex m{};
  ++m[a];
  ++m[b];
  ++m[c];
  return partial(i, j, m);
}

double MetricJet::d4g(int i, int j, int a, int b, int c, int d) const {
  MultiIndex m{};
  ++m[a];
  ++m[b];
  ++m[c];
  ++m[d];
  return partial(i, j, m);
}

MetricField MetricField::analytic(std::string label, ChartDomain domain, TaylorEval taylor, ValueEval value,
                                  Provenance provenance) {
  MetricField f;
  f.label_ = std::move(label);
  f.domain_ = domain;
  f.taylor_ = std::move(taylor);
  f.value_ = std::move(value);
  f.provenance_ = provenance;
  return f;
}

MetricField MetricField::finite_difference(std::string label, ChartDomain domain, ValueEval value,
                                           double step) {
  if (!(step > 0.0)) fail(ErrorCode::kInvalidArgument, "finite-difference step must be positive");
  MetricField f;
  f.label_ = std::move(label);
  f.domain_ = domain;
  f.value_ = std::move(value);
  f.provenance_ = Provenance::kFiniteDifference;
  f.fd_step_ = step;
  return f;
}

Mat4 MetricField::value(const Point& p) const {
  if (!value_) fail(ErrorCode::kInvalidArgument, "metric field is empty");
  return value_(domain_.canonical(p));
}

namespace {

// Fornberg's recursion: weights[m][k] for the m-th derivative at 0 from nodes x[k].
std::vector<std::vector<double>> fornberg(const std::vector<double>& x, int max_deriv) {
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(max_deriv + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0, c4 = x[0];
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, max_deriv);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i];
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

// Central stencils of accuracy order 6 on offsets -4..4 (unit spacing).
struct Stencils {
  static constexpr int kHalf = 4;
  std::array<std::array<double, 2 * kHalf + 1>, kMetricOrder + 1> w{};
  Stencils() {
    for (int m = 0; m <= kMetricOrder; ++m) {
      const int half = m <= 2 ? 3 : 4;
      std::vector<double> x;
      for (int k = -half; k <= half; ++k) x.push_back(k);
      const auto c = fornberg(x, m);
      for (int k = -half; k <= half; ++k) w[m][k + kHalf] = c[m][k + half];
    }
  }
};

const Stencils& stencils() {
  static const Stencils s;
  return s;
}

}  // namespace

MetricTaylor finite_difference_jet(const MetricField::ValueEval& value, const Point& p, double h) {
  constexpr int H = Stencils::kHalf;
  constexpr int W = 2 * H + 1;
  const auto& st = stencils();
  // sample only the lattice points some multi-index of degree <= 4 touches
  std::vector<Mat4> samples(static_cast<std::size_t>(W) * W * W * W);
  std::vector<char> have(samples.size(), 0);
  auto slot = [](const std::array<int, kDim>& o) {
    return (((o[0] + H) * W + (o[1] + H)) * W + (o[2] + H)) * W + (o[3] + H);
  };
  MetricTaylor jet;
  for (int k = 0; k < taylor_size(kMetricOrder); ++k) {
    const auto& e = detail::kMonomials.exps[k];
    std::array<int, kDim> lo{}, hi{};
    for (int a = 0; a < kDim; ++a) {
      const int half = e[a] == 0 ? 0 : (e[a] <= 2 ? 3 : 4);
      lo[a] = -half;
      hi[a] = half;
    }
    Mat4 acc{};
    std::array<int, kDim> o{};
    for (o[0] = lo[0]; o[0] <= hi[0]; ++o[0])
      for (o[1] = lo[1]; o[1] <= hi[1]; ++o[1])
        for (o[2] = lo[2]; o[2] <= hi[2]; ++o[2])
          for (o[3] = lo[3]; o[3] <= hi[3]; ++o[3]) {
            double c = 1.0;
            for (int a = 0; a < kDim; ++a) c *= e[a] == 0 ? 1.0 : st.w[e[a]][o[a] + H];
            if (c == 0.0) continue;
            const int s = slot(o);
            if (!have[s]) {
              Point q = p;
              for (int a = 0; a < kDim; ++a) q[a] += o[a] * h;
              samples[s] = value(q);
              have[s] = 1;
            }
            for (int i = 0; i < kDim; ++i)
              for (int j = i; j < kDim; ++j) acc[i][j] += c * samples[s][i][j];
          }
    const double scale = std::pow(h, -detail::kMonomials.degree[k]) / detail::kMonomials.factorial[k];
    for (int i = 0; i < kDim; ++i)
      for (int j = i; j < kDim; ++j) {
        jet[i][j].coeffs()[k] = acc[i][j] * scale;
        jet[j][i].coeffs()[k] = acc[i][j] * scale;
      }
  }
  return jet;
}

MetricTaylor MetricField::taylor(const Point& p, const JetOptions& opts) const {
  const Point q = domain_.canonical(p);
  if (provenance_ != Provenance::kFiniteDifference) {
    if (!taylor_) fail(ErrorCode::kInvalidArgument, "metric field is empty");
    return taylor_(q);
  }
  auto eval = [this](const Point& x) { return value(x); };
  const MetricTaylor coarse = finite_difference_jet(eval, q, fd_step_);
  const MetricTaylor fine = finite_difference_jet(eval, q, 0.5 * fd_step_);
  // per derivative order: max |coarse - fine| against the size of that order
  for (int deg = 0; deg <= kMetricOrder; ++deg) {
    double diff = 0.0, size = 0.0;
    for (int k = deg == 0 ? 0 : taylor_size(deg - 1); k < taylor_size(deg); ++k) {
      const double f = detail::kMonomials.factorial[k];
      for (int i = 0; i < kDim; ++i)
        for (int j = 0; j < kDim; ++j) {
          diff = std::max(diff, std::abs(coarse[i][j].coeffs()[k] - fine[i][j].coeffs()[k]) * f);
          size = std::max(size, std::abs(fine[i][j].coeffs()[k]) * f);
        }
    }
    if (diff > opts.fd_tol * std::max(1.0, size)) {
      std::ostringstream os;
      os << "finite-difference jet of '" << label_ << "' inconsistent at order " << deg
         << ": step-halving mismatch " << diff;
      fail(ErrorCode::kJetInconsistent, os.str());
    }
  }
  return fine;
}

MetricJet jet_of_metric(const MetricField& field, const ChartPoint& p, int order, const JetOptions& opts) {
  if (order < 0 || order > kMetricOrder)
    fail(ErrorCode::kInsufficientJetOrder,
         "jet order must lie in [0, " + std::to_string(kMetricOrder) + "], got " + std::to_string(order));
  if (!field.valid()) fail(ErrorCode::kInvalidArgument, "metric field is empty");
  const Point q = field.domain().canonical(p.coords);
  const MetricTaylor g = field.taylor(q, opts);
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (double c : g[i][j].coeffs())
        if (!std::isfinite(c)) fail(ErrorCode::kNonFiniteValue, "metric jet has non-finite entries");
  for (int i = 0; i < kDim; ++i)
    for (int j = i + 1; j < kDim; ++j)
      for (int k = 0; k < taylor_size(order); ++k) {
        const double a = g[i][j].coeffs()[k], b = g[j][i].coeffs()[k];
        if (std::abs(a - b) > 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}))
          fail(ErrorCode::kJetInconsistent, "metric jet is not symmetric");
      }
  const double lmin = min_eigenvalue(jet_values(g));
  if (!(lmin > opts.pd_floor)) {
    std::ostringstream os;
    os << "metric not positive definite at (" << q[0] << ", " << q[1] << ", " << q[2] << ", " << q[3]
       << "): smallest eigenvalue " << lmin;
    fail(ErrorCode::kPdViolation, os.str());
  }
  return MetricJet(q, g, order);
}

ScalarField::ScalarField(std::string label, TaylorEval taylor, ValueEval value)
    : label_(std::move(label)), taylor_(std::move(taylor)), value_(std::move(value)) {}

ScalarField ScalarField::constant(double c) {
  return ScalarField(
      "constant", [c](const Point&) { return ScalarTaylor(c); }, [c](const Point&) { return c; });
}

double det4(const Mat4& m) {
  Eigen::Matrix4d a;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) a(i, j) = m[i][j];
  return a.determinant();
}

Mat4 inverse4(const Mat4& m) {
  Eigen::Matrix4d a;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) a(i, j) = m[i][j];
  const Eigen::Matrix4d inv = a.inverse();
  Mat4 r;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) r[i][j] = inv(i, j);
  return r;
}

double min_eigenvalue(const Mat4& m) {
  Eigen::Matrix4d a;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) a(i, j) = 0.5 * (m[i][j] + m[j][i]);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double integrate(const std::function<double(const Point&)>& f, const ChartGrid& grid,
                 const MetricField& metric) {
  CompensatedSum sum;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Point x = grid.node(n);
    const double d = det4(metric.value(x));
    if (!(d > 0.0)) fail(ErrorCode::kPdViolation, "metric determinant not positive at a quadrature node");
    const double v = f(x) * std::sqrt(d) * grid.volume_weight(n);
    if (!std::isfinite(v)) fail(ErrorCode::kNonFiniteValue, "integrand is not finite at a quadrature node");
    sum.add(v);
  }
  return sum.value();
}

double integrate(const ScalarField& f, const ChartGrid& grid, const MetricField& metric) {
  return integrate([&f](const Point& x) { return f.value(x); }, grid, metric);
}

double integrate_node_values(const std::vector<double>& values, const ChartGrid& grid,
                             const MetricField& metric) {
  if (values.size() != grid.size()) fail(ErrorCode::kInvalidArgument, "value count does not match grid");
  CompensatedSum sum;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const double d = det4(metric.value(grid.node(n)));
    if (!(d > 0.0)) fail(ErrorCode::kPdViolation, "metric determinant not positive at a quadrature node");
    const double v = values[n] * std::sqrt(d) * grid.volume_weight(n);
    if (!std::isfinite(v)) fail(ErrorCode::kNonFiniteValue, "integrand is not finite at a quadrature node");
    sum.add(v);
  }
  return sum.value();
}

double sum_with_weights(const std::vector<double>& values, const ChartGrid& grid) {
  if (values.size() != grid.size()) fail(ErrorCode::kInvalidArgument, "value count does not match grid");
  CompensatedSum sum;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const double v = values[n] * grid.volume_weight(n);
    if (!std::isfinite(v)) fail(ErrorCode::kNonFiniteValue, "integrand is not finite at a quadrature node");
    sum.add(v);
  }
  return sum.value();
}

}  // namespace bachgeom
