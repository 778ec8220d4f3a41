#include "bachgeom/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bachgeom {

namespace {

constexpr int kRampDegree = 11;
using Poly = std::array<double, kRampDegree + 1>;

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// sum_{j=lo}^{11} C(11, j) x^j (1 - x)^(11 - j) in monomial form
Poly beta_cdf_poly(int lo) {
  Poly c{};
  for (int j = lo; j <= kRampDegree; ++j) {
    const double cj = binomial(kRampDegree, j);
    const int m = kRampDegree - j;
    for (int i = 0; i <= m; ++i) c[j + i] += cj * binomial(m, i) * ((i % 2 == 0) ? 1.0 : -1.0);
  }
  return c;
}

const Poly& ramp_at_zero() {
  static const Poly p = beta_cdf_poly(7);
  return p;
}

// I_u(5, 7) = 1 - I_{1-u}(7, 5), accurate near s = 1
const Poly& ramp_at_one() {
  static const Poly p = beta_cdf_poly(5);
  return p;
}

double poly_derivative(const Poly& c, double x, int m) {
  double r = 0.0;
  for (int j = kRampDegree; j >= m; --j) {
    double f = 1.0;
    for (int i = 0; i < m; ++i) f *= j - i;
    r = r * x + c[j] * f;
  }
  return r;
}

// d^m/ds^m I_s(7, 5) on [0, 1)
double ramp_derivative(double s, int m) {
  if (s >= 1.0) return m == 0 ? 1.0 : 0.0;
  if (s <= 0.5) return poly_derivative(ramp_at_zero(), s, m);
  const double u = 1.0 - s;
  const double v = poly_derivative(ramp_at_one(), u, m);
  if (m == 0) return 1.0 - v;
  return (m % 2 == 0) ? -v : v;
}

constexpr double kSlopeLo = 0.62996052494743658;  // (1/4)^(1/3)
constexpr double kSlopeHi = 0.90856029641606983;  // (3/4)^(1/3)

// y' / (1 - delta) at x
double ramp_slope(double x) { return 2.0 * x * ramp_derivative(x * x, 1); }

double wrap(double d, double period) { return d - period * std::round(d / period); }

Mat4 christoffel_contracted(const MetricTaylor& g, const Mat4& gi, const Vec4& d, Tensor3* gamma_out) {
  Mat4 out{};
  Tensor3 gamma{};
  for (int k = 0; k < kDim; ++k)
    for (int i = 0; i < kDim; ++i)
      for (int j = i; j < kDim; ++j) {
        double v = 0.0;
        for (int l = 0; l < kDim; ++l)
          v += 0.5 * gi[k][l] *
               (g[j][l].diff(i).value() + g[i][l].diff(j).value() - g[i][j].diff(l).value());
        gamma[k][i][j] = gamma[k][j][i] = v;
      }
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int k = 0; k < kDim; ++k) out[i][j] += gamma[k][i][j] * d[k];
  if (gamma_out) *gamma_out = gamma;
  return out;
}

MetricTaylor route_direct(const MetricTaylor& g, const ScalarTaylor& psi, double k) {
  const Taylor<kMetricOrder> p4 = psi.truncate<kMetricOrder>();
  std::array<Taylor<kMetricOrder>, kDim> d;
  for (int i = 0; i < kDim; ++i) d[i] = psi.diff(i);
  MetricTaylor out;
  for (int i = 0; i < kDim; ++i)
    for (int j = i; j < kDim; ++j) {
      out[i][j] = p4 * g[i][j];
      if (k != 0.0) out[i][j].add_product(k * d[i], k * d[j]);
      out[j][i] = out[i][j];
    }
  return out;
}

MetricTaylor route_factored(const MetricTaylor& g, const ScalarTaylor& psi, double k) {
  const MetricTaylor bar = deformed_jet(g, 2.0 * k * sqrt(psi));
  const Taylor<kMetricOrder> p4 = psi.truncate<kMetricOrder>();
  MetricTaylor out;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) out[i][j] = p4 * bar[i][j];
  return out;
}

MetricTaylor normalized_jet(const MetricTaylor& g, const ScalarTaylor& psi, double k) {
  const MetricTaylor g2 = route_direct(g, psi, k);
  if (k == 0.0) return g2;
  const JetMat<kMetricOrder> gi = invert_jet<kMetricOrder>(g);
  Taylor<kMetricOrder> q;
  std::array<Taylor<kMetricOrder>, kDim> d;
  for (int i = 0; i < kDim; ++i) d[i] = psi.diff(i);
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) q += gi[i][j] * d[i] * d[j];
  const Taylor<kMetricOrder> c = pow(1.0 + (k * k) * q / psi.truncate<kMetricOrder>(), -0.5);
  MetricTaylor out;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) out[i][j] = c * g2[i][j];
  return out;
}

ScalarTaylor checked_psi(const ScalarField& psi, const Point& x) {
  const ScalarTaylor p = psi.taylor(x);
  if (!(p.value() > 0.0)) fail(ErrorCode::kFactorNotPositive, "psi must be positive");
  return p;
}

double bach_bar_norm(const MetricTaylor& g, const ScalarTaylor& psi, double k) {
  return point_curvature(deformed_jet(g, 2.0 * k * sqrt(psi))).bach_norm;
}

struct LocalJets {
  MetricTaylor g;
  ScalarTaylor psi;
};

// Jets at a ball node in coordinates whose first axis is the radial direction.  Both
// quantities of interest are invariant, and the strongly anisotropic g'' is then
// diagonal at the node, which avoids cancellation in its curvature.
LocalJets local_jets(const MetricField& g, const ScalarField& psi, const ChartGrid& grid, const Point& x) {
  LocalJets out{g.taylor(x), checked_psi(psi, x)};
  if (grid.topology() != Topology::kPolarBall) return out;
  const ChartDomain& dom = g.domain();
  Vec4 e{};
  double norm = 0.0;
  for (int a = 0; a < kDim; ++a) {
    e[a] = x[a] - grid.center()[a];
    if (dom.periodic[a]) e[a] = wrap(e[a], dom.hi[a] - dom.lo[a]);
    norm += e[a] * e[a];
  }
  norm = std::sqrt(norm);
  if (norm == 0.0) return out;
  Vec4 v{};
  double vv = 0.0;
  for (int a = 0; a < kDim; ++a) {
    v[a] = (a == 0 ? 1.0 : 0.0) - e[a] / norm;
    vv += v[a] * v[a];
  }
  if (vv < 1e-28) return out;
  Mat4 q{};
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) q[i][j] = (i == j ? 1.0 : 0.0) - 2.0 * v[i] * v[j] / vv;
  const auto mono = substitution_monomials<kMetricOrder>(q);
  JetMat<kMetricOrder> sub;
  for (int i = 0; i < kDim; ++i)
    for (int j = i; j < kDim; ++j) sub[i][j] = sub[j][i] = linear_substitute(out.g[i][j], mono);
  for (int a = 0; a < kDim; ++a)
    for (int b = a; b < kDim; ++b) {
      Taylor<kMetricOrder> h;
      for (int i = 0; i < kDim; ++i)
        for (int j = 0; j < kDim; ++j)
          if (q[i][a] != 0.0 && q[j][b] != 0.0) h += (q[i][a] * q[j][b]) * sub[i][j];
      out.g[a][b] = out.g[b][a] = h;
    }
  out.psi = linear_substitute(out.psi, q);
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

BumpProfile::BumpProfile(double delta) : delta_(delta) {}

double BumpProfile::factorial(int m) {
  double f = 1.0;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

double BumpProfile::s_derivative(double s, int m) const {
  if (s >= 1.0) return m == 0 ? 1.0 : 0.0;
  const double r = (1.0 - delta_) * ramp_derivative(s, m);
  return m == 0 ? delta_ + r : r;
}

double BumpProfile::derivative(double x, int m) const {
  if (std::abs(x) >= 1.0) return m == 0 ? 1.0 : 0.0;
  const double s = x * x;
  double r = 0.0;
  for (int j = 0; 2 * j <= m; ++j) {
    const double c = factorial(m) / (factorial(j) * factorial(m - 2 * j));
    r += c * std::pow(2.0 * x, m - 2 * j) * s_derivative(s, m - j);
  }
  return r;
}

double max_feasible_delta() {
  static const double value = [] {
    const int n = 20000;
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int i = 0; i <= n; ++i) {
      const double x = kSlopeLo + (kSlopeHi - kSlopeLo) * i / n;
      const double v = ramp_slope(x);
      if (v < best) {
        best = v;
        arg = i;
      }
    }
    // golden-section refinement around the sampled minimum
    double a = kSlopeLo + (kSlopeHi - kSlopeLo) * std::max(arg - 1, 0) / n;
    double b = kSlopeLo + (kSlopeHi - kSlopeLo) * std::min(arg + 1, n) / n;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100; ++it) {
      const double c = b - phi * (b - a), d = a + phi * (b - a);
      if (ramp_slope(c) < ramp_slope(d)) b = d; else a = c;
    }
    best = std::min({best, ramp_slope(0.5 * (a + b)), ramp_slope(kSlopeLo), ramp_slope(kSlopeHi)});
    return 1.0 - 1.0 / best;
  }();
  return value;
}

BumpProfile bump_profile(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) fail(ErrorCode::kInvalidArgument, "delta must lie in (0, 1)");
  const double dmax = max_feasible_delta();
  if (delta > dmax)
    fail(ErrorCode::kInfeasibleDelta,
         "delta " + fmt(delta) + " violates y' >= 1 on the slope interval; maximal feasible delta is " + fmt(dmax));
  return BumpProfile(delta);
}

bool ProfileReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const ProfileCheck& c) { return c.pass; });
}

ProfileReport check_profile(const BumpProfile& y, int samples, double ratio_bound) {
  ProfileReport rep;
  rep.samples = samples;
  double sym = 0.0, outside = 0.0, min_y = std::numeric_limits<double>::infinity();
  double min_slope_open = std::numeric_limits<double>::infinity();
  double min_slope_band = std::numeric_limits<double>::infinity();
  double ratio = 0.0;
  auto ratio_at = [&](double x) {
    const double d1 = y.derivative(x, 1), d2 = y.derivative(x, 2);
    if (d1 > 0.0) ratio = std::max(ratio, (1.0 - x) * std::abs(d2) / d1);
  };
  for (int i = 0; i < samples; ++i) {
    const double x = -1.5 + 3.0 * (i + 0.5) / samples;
    const double v = y.value(x);
    sym = std::max(sym, std::abs(v - y.value(-x)));
    if (std::abs(x) >= 1.0) outside = std::max(outside, std::abs(v - 1.0));
    min_y = std::min(min_y, v);
    if (x > 0.0 && x < 1.0) {
      min_slope_open = std::min(min_slope_open, y.derivative(x, 1));
      if (x >= 0.9) ratio_at(x);
    }
  }
  for (int i = 0; i <= samples / 10; ++i) {
    const double x = kSlopeLo + (kSlopeHi - kSlopeLo) * i / (samples / 10);
    min_slope_band = std::min(min_slope_band, y.derivative(x, 1));
  }
  for (int m = 4; m <= 40; ++m) ratio_at(1.0 - std::ldexp(1.0, -m));
  min_y = std::min(min_y, y.value(0.0));
  rep.checks.push_back({"even", sym == 0.0, sym});
  rep.checks.push_back({"one-outside", outside == 0.0, outside});
  rep.checks.push_back({"floor", min_y >= y.delta() && y.delta() > 0.0, min_y});
  rep.checks.push_back({"increasing", min_slope_open > 0.0, min_slope_open});
  rep.checks.push_back({"slope-band", min_slope_band >= 1.0, min_slope_band});
  rep.checks.push_back({"second-derivative-ratio", ratio <= ratio_bound, ratio});
  return rep;
}

ScalarField psi_field(const BumpProfile& y, const std::vector<Ball>& balls, const ChartDomain& domain) {
  for (const Ball& b : balls)
    if (!(b.radius > 0.0)) fail(ErrorCode::kInvalidArgument, "ball radius must be positive");
  auto locate = [balls, domain](const Point& x, Vec4& disp, double& s) -> const Ball* {
    for (const Ball& b : balls) {
      double r2 = 0.0;
      Vec4 d{};
      for (int a = 0; a < kDim; ++a) {
        d[a] = x[a] - b.center[a];
        if (domain.periodic[a]) d[a] = wrap(d[a], domain.hi[a] - domain.lo[a]);
        r2 += d[a] * d[a];
      }
      const double sv = r2 / (b.radius * b.radius);
      if (sv < 1.0) {
        disp = d;
        s = sv;
        return &b;
      }
    }
    return nullptr;
  };
  auto taylor = [y, locate](const Point& x) -> ScalarTaylor {
    Vec4 d{};
    double s = 0.0;
    const Ball* b = locate(x, d, s);
    if (!b) return ScalarTaylor(1.0);
    ScalarTaylor st;
    for (int a = 0; a < kDim; ++a) {
      const ScalarTaylor v = ScalarTaylor::variable(a, d[a]);
      st += v * v;
    }
    st *= 1.0 / (b->radius * b->radius);
    return ScalarTaylor::compose(st, y.s_coefficients<kScalarOrder>(s));
  };
  auto value = [y, locate](const Point& x) {
    Vec4 d{};
    double s = 0.0;
    return locate(x, d, s) ? y.s_derivative(s, 0) : 1.0;
  };
  return ScalarField("psi", taylor, value);
}

ScalarField eta_field(const ScalarField& psi) {
  return ScalarField(
      "eta", [psi](const Point& x) { return 2.0 * sqrt(checked_psi(psi, x)); },
      [psi](const Point& x) {
        const double v = psi.value(x);
        if (!(v > 0.0)) fail(ErrorCode::kFactorNotPositive, "psi must be positive");
        return 2.0 * std::sqrt(v);
      });
}

MetricField double_deformation(const MetricField& g, const ScalarField& psi, double k) {
  auto taylor = [g, psi, k](const Point& x) { return route_direct(g.taylor(x), checked_psi(psi, x), k); };
  auto value = [g, psi, k](const Point& x) { return jet_values(route_direct(g.taylor(x), checked_psi(psi, x), k)); };
  return MetricField::analytic(g.label() + "''", g.domain(), taylor, value, Provenance::kDualNumber);
}

MetricField double_deformation_factored(const MetricField& g, const ScalarField& psi, double k) {
  auto taylor = [g, psi, k](const Point& x) { return route_factored(g.taylor(x), checked_psi(psi, x), k); };
  auto value = [g, psi, k](const Point& x) {
    return jet_values(route_factored(g.taylor(x), checked_psi(psi, x), k));
  };
  return MetricField::analytic(g.label() + "''(factored)", g.domain(), taylor, value, Provenance::kDualNumber);
}

double double_deformation_mismatch(const MetricField& g, const ScalarField& psi, double k,
                                   const std::vector<Point>& points) {
  double worst = 0.0;
  for (const Point& x : points) {
    const MetricTaylor gj = g.taylor(x);
    const ScalarTaylor p = checked_psi(psi, x);
    const MetricTaylor a = route_direct(gj, p, k), b = route_factored(gj, p, k);
    double diff = 0.0, size = 0.0;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j)
        for (int m = 0; m < Taylor<kMetricOrder>::kSize; ++m) {
          diff = std::max(diff, std::abs(a[i][j].coeff(m) - b[i][j].coeff(m)));
          size = std::max(size, std::abs(a[i][j].coeff(m)));
        }
    worst = std::max(worst, diff / (1.0 + size));
  }
  return worst;
}

MetricField normalized_double_deformation(const MetricField& g, const ScalarField& psi, double k) {
  auto taylor = [g, psi, k](const Point& x) { return normalized_jet(g.taylor(x), checked_psi(psi, x), k); };
  auto value = [g, psi, k](const Point& x) { return jet_values(normalized_jet(g.taylor(x), checked_psi(psi, x), k)); };
  return MetricField::analytic(g.label() + "~''", g.domain(), taylor, value, Provenance::kDualNumber);
}

PhiValues evaluate_phi(const MetricField& g, const ScalarField& psi, double k, double t, const ChartGrid& grid,
                       std::vector<NodeSample>* samples) {
  if (!(k > 0.0)) fail(ErrorCode::kInvalidArgument, "k must be positive");
  if (!(t >= 0.0)) fail(ErrorCode::kInvalidArgument, "t must be non-negative");
  CompensatedSum direct, formula, literal, base;
  PhiValues out;
  out.min_bach_bar = std::numeric_limits<double>::infinity();
  const double k2 = k * k;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Point x = grid.node(n);
    const double w = grid.volume_weight(n);
    const LocalJets lj = local_jets(g, psi, grid, x);
    const MetricTaylor& gj = lj.g;
    const ScalarTaylor& ps = lj.psi;
    const PointCurvature pc = point_curvature(gj);
    const double sq = std::sqrt(det4(pc.g));
    base.add((pc.scalar + t * std::sqrt(pc.bach_norm)) * sq * w);

    const PointCurvature pb = point_curvature(deformed_jet(gj, 2.0 * k * sqrt(ps)));
    out.min_bach_bar = std::min(out.min_bach_bar, pb.bach_norm);
    const MetricTaylor gt = normalized_jet(gj, ps, k);
    const PointCurvature pt = point_curvature(gt);
    const double fb = pt.scalar + t * std::sqrt(pt.bach_norm);
    const double vol_t = std::sqrt(det4(pt.g));
    direct.add(fb * vol_t * w);

    const Mat4& gi = pc.ginv;
    const double p = ps.value();
    Vec4 d{}, up{};
    for (int i = 0; i < kDim; ++i) d[i] = ps.diff(i).value();
    double s = 0.0;
    for (int i = 0; i < kDim; ++i) {
      for (int j = 0; j < kDim; ++j) up[i] += gi[i][j] * d[j];
      s += up[i] * d[i];
    }
    const Mat4 gd = christoffel_contracted(gj, gi, d, nullptr);
    Mat4 h{};
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) {
        MultiIndex a{};
        ++a[i];
        ++a[j];
        h[i][j] = ps.derivative(a) - gd[i][j];
      }
    double lap = 0.0, A = 0.0, B = 0.0, ric = 0.0;
    Vec4 hu{};
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) {
        lap += gi[i][j] * h[i][j];
        hu[i] += h[i][j] * up[j];
        ric += pc.ricci[i][j] * up[i] * up[j];
      }
    for (int i = 0; i < kDim; ++i) {
      A += hu[i] * up[i];
      for (int j = 0; j < kDim; ++j) B += hu[i] * gi[i][j] * hu[j];
    }
    const double D = p / k2 + s;
    const double bb = std::sqrt(pb.bach_norm);
    const double common = pc.scalar * p - ric * p / D + A / D + 1.5 * s / (k2 * D) +
                          1.5 * p * (B / (D * D) - A * A / (D * D * D));
    const double tail = 1.5 * (0.25 * s * s * s - s * A * p) / (k2 * D * D * D);
    formula.add((common + t * p * bb - 0.5 * p * lap / (k2 * D) + tail) * sq * w);
    literal.add((common + t * bb - p * lap / (k2 * D) + tail * p) * sq * w);

    if (samples) {
      NodeSample ns;
      ns.x = x;
      ns.rho = grid.topology() == Topology::kPolarBall ? grid.polar(n)[0] : 0.0;
      ns.psi = p;
      ns.bach_bar = pb.bach_norm;
      ns.scalar_bar = pb.scalar;
      ns.scalar_bach = fb;
      samples->push_back(ns);
    }
    if (!std::isfinite(fb * vol_t) || !std::isfinite(common + tail))
      fail(ErrorCode::kNonFiniteValue, "non-finite Phi integrand at a grid node");
  }
  out.direct = direct.value();
  out.formula = formula.value();
  out.literal = literal.value();
  out.base = base.value();
  out.nodes = grid.size();
  return out;
}

double min_bach_bar(const MetricField& g, const ScalarField& psi, double k, const std::vector<ChartGrid>& grids) {
  double m = std::numeric_limits<double>::infinity();
  for (const ChartGrid& grid : grids)
    for (std::size_t n = 0; n < grid.size(); ++n) {
      const Point x = grid.node(n);
      const LocalJets lj = local_jets(g, psi, grid, x);
      m = std::min(m, bach_bar_norm(lj.g, lj.psi, k));
    }
  return m;
}

KSelection select_k(const MetricField& g, const ScalarField& psi, const std::vector<double>& candidates,
                    const std::vector<ChartGrid>& grids, double bach_floor) {
  if (candidates.empty()) fail(ErrorCode::kInvalidArgument, "no k candidates given");
  KSelection sel;
  sel.candidates = candidates;
  double best = -1.0;
  for (double k : candidates) {
    if (!(k > 0.0)) fail(ErrorCode::kInvalidArgument, "k candidates must be positive");
    const double m = min_bach_bar(g, psi, k, grids);
    sel.min_bach.push_back(m);
    if (m > best) {
      best = m;
      sel.k = k;
    }
  }
  if (!(best > bach_floor))
    fail(ErrorCode::kAllCandidatesDegenerate,
         "every k candidate leaves the deformed Bach norm at or below " + fmt(bach_floor) + " (best " + fmt(best) + ")");
  return sel;
}

bool BoundTable::bounded() const {
  if (rows.empty()) return true;
  const auto last = std::max_element(rows.begin(), rows.end(),
                                     [](const BoundSample& a, const BoundSample& b) { return a.k < b.k; });
  double qmax = 0.0;
  for (const auto& r : rows) qmax = std::max(qmax, r.q);
  return qmax <= 2.0 * last->q + undeformed_q;
}

BoundTable bound_sampler(const MetricField& g, const ScalarField& psi, const Ball& ball,
                         const std::vector<double>& ks, const ChartGrid& grid) {
  if (grid.topology() != Topology::kPolarBall) fail(ErrorCode::kInvalidArgument, "bound sampler needs a polar-ball grid");
  BoundTable table;
  std::vector<MetricTaylor> gj(grid.size());
  std::vector<ScalarTaylor> pj(grid.size());
  std::vector<double> weight(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Point x = grid.node(n);
    const LocalJets lj = local_jets(g, psi, grid, x);
    gj[n] = lj.g;
    pj[n] = lj.psi;
    const double rho = grid.polar(n)[0];
    weight[n] = 1.0 / (1.0 + 1.0 / std::sqrt(ball.radius - rho));
    table.undeformed_q = std::max(table.undeformed_q, std::sqrt(point_curvature(gj[n]).bach_norm) * weight[n]);
  }
  for (double k : ks) {
    BoundSample row;
    row.k = k;
    for (std::size_t n = 0; n < grid.size(); ++n) {
      const double q = std::sqrt(bach_bar_norm(gj[n], pj[n], k)) * weight[n];
      if (q > row.q) {
        row.q = q;
        row.rho_at_max = grid.polar(n)[0];
      }
    }
    table.rows.push_back(row);
  }
  return table;
}

std::vector<Ball> default_balls(const MetricField& g, const ConstructionParams& params) {
  if (!(params.nu > 0.0)) fail(ErrorCode::kInvalidArgument, "nu must be positive");
  if (params.balls < 1) fail(ErrorCode::kInvalidArgument, "at least one ball slot is needed");
  if (!(params.radius > 0.0)) fail(ErrorCode::kInvalidArgument, "radius must be positive");
  const ChartDomain& dom = g.domain();
  bool closed = true;
  for (int a = 0; a < kDim; ++a) closed = closed && dom.periodic[a];
  std::vector<Point> centers = params.centers;
  if (centers.empty()) {
    if (closed) {
      for (int m = 0; m < 16; ++m) {
        Point c{};
        for (int a = 0; a < kDim; ++a) {
          const double L = dom.hi[a] - dom.lo[a];
          c[a] = dom.lo[a] + 0.25 * L + 0.5 * L * ((m >> (kDim - 1 - a)) & 1);
        }
        centers.push_back(c);
      }
    } else {
      centers.push_back(Point{});
    }
  }
  const auto used = static_cast<std::size_t>(
      std::min<double>({static_cast<double>(params.balls), std::ceil(params.nu), static_cast<double>(centers.size())}));
  std::vector<Ball> balls;
  for (std::size_t i = 0; i < used; ++i) balls.push_back({centers[i], params.radius});
  for (int a = 0; a < kDim; ++a)
    if (dom.periodic[a] && 2.0 * params.radius >= dom.hi[a] - dom.lo[a])
      fail(ErrorCode::kInvalidArgument, "ball diameter exceeds the period");
  for (std::size_t i = 0; i < balls.size(); ++i)
    for (std::size_t j = i + 1; j < balls.size(); ++j) {
      double d2 = 0.0;
      for (int a = 0; a < kDim; ++a) {
        double d = balls[i].center[a] - balls[j].center[a];
        if (dom.periodic[a]) d = wrap(d, dom.hi[a] - dom.lo[a]);
        d2 += d * d;
      }
      if (std::sqrt(d2) < 2.0 * params.radius) fail(ErrorCode::kInvalidArgument, "balls are not disjoint");
    }
  return balls;
}

ConstructionReport run_construction(const MetricField& g, const ConstructionParams& params, bool keep_samples) {
  ConstructionReport rep;
  const double t = params.t;
  if (!(t >= 0.0)) fail(ErrorCode::kInvalidArgument, "t must be non-negative");
  const std::vector<Ball> balls = default_balls(g, params);
  rep.delta = max_feasible_delta() / (1.0 + params.nu);
  const BumpProfile y = bump_profile(rep.delta);
  const ScalarField psi = psi_field(y, balls, g.domain());
  const ChartDomain& dom = g.domain();
  rep.closed_base = true;
  for (int a = 0; a < kDim; ++a) rep.closed_base = rep.closed_base && dom.periodic[a];

  std::vector<ChartGrid> grids;
  for (const Ball& b : balls) {
    ChartSpec cs;
    cs.topology = Topology::kPolarBall;
    cs.extents = {b.radius, 1.0, 1.0, 1.0};
    cs.resolution = params.ball_resolution;
    cs.radial_panels = params.radial_panels;
    cs.center = b.center;
    grids.push_back(make_chart(cs));
  }

  // a degenerate candidate set is reported after Phi, so that a positive Phi is diagnosed first
  std::optional<Error> k_error;
  try {
    rep.selection = select_k(g, psi, params.k_candidates, grids, params.spectral.bach_floor);
    rep.k_chosen = rep.selection.k;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kAllCandidatesDegenerate || t != 0.0) k_error = e;
    rep.k_chosen = params.k_candidates.front();
  }
  const double k = rep.k_chosen;

  std::vector<Point> probes;
  for (const ChartGrid& grid : grids)
    for (std::size_t n = 0; n < grid.size(); n += 97) probes.push_back(grid.node(n));
  rep.factorization_mismatch = double_deformation_mismatch(g, psi, k, probes);
  if (!(rep.factorization_mismatch <= 1e-10))
    fail(ErrorCode::kInternal, "the two routes to g'' disagree by " + fmt(rep.factorization_mismatch));

  double sum_direct = 0.0, sum_formula = 0.0, sum_literal = 0.0, sum_base = 0.0;
  double min_bach = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < balls.size(); ++b) {
    BallReport br;
    br.ball = balls[b];
    br.phi = evaluate_phi(g, psi, k, t, grids[b], keep_samples ? &rep.samples : nullptr);
    sum_direct += br.phi.direct;
    sum_formula += br.phi.formula;
    sum_literal += br.phi.literal;
    sum_base += br.phi.base;
    min_bach = std::min(min_bach, br.phi.min_bach_bar);
    rep.balls.push_back(br);
  }

  ChartGrid box;
  if (rep.closed_base) {
    ChartSpec cs;
    for (int a = 0; a < kDim; ++a) {
      cs.extents[a] = dom.hi[a] - dom.lo[a];
      cs.resolution[a] = params.box_resolution;
    }
    box = make_chart(cs);
    CompensatedSum base;
    for (std::size_t n = 0; n < box.size(); ++n) {
      const Point x = box.node(n);
      const PointCurvature pc = point_curvature(g.taylor(x));
      base.add((pc.scalar + t * std::sqrt(pc.bach_norm)) * std::sqrt(det4(pc.g)) * box.volume_weight(n));
      if (psi.value(x) == 1.0) min_bach = std::min(min_bach, pc.bach_norm);
    }
    rep.base_integral = base.value();
    rep.phi_value = rep.base_integral - sum_base + sum_direct;
    rep.phi_formula = rep.base_integral - sum_base + sum_formula;
    rep.phi_literal = rep.base_integral - sum_base + sum_literal;
  } else {
    rep.phi_value = sum_direct;
    rep.phi_formula = sum_formula;
    rep.phi_literal = sum_literal;
  }
  rep.phi_oracle_residual = std::abs(rep.phi_value - rep.phi_formula) / (1.0 + std::abs(rep.phi_value));
  rep.min_bach_norm = min_bach;
  rep.bounds = bound_sampler(g, psi, balls.front(), params.bound_ks, grids.front());

  if (!(rep.phi_value < 0.0))
    throw ConstructionFailure(ErrorCode::kPhiNotNegative,
                              "Phi = " + fmt(rep.phi_value) + " is not negative at k = " + fmt(k) +
                                  ", delta = " + fmt(rep.delta) + "; try a larger nu",
                              rep);
  if (k_error) throw ConstructionFailure(ErrorCode::kBachDegenerate, k_error->what(), rep);
  if (t != 0.0 && !(rep.min_bach_norm > params.spectral.bach_floor))
    throw ConstructionFailure(ErrorCode::kBachDegenerate,
                              "grid-minimum Bach norm " + fmt(rep.min_bach_norm) + " is not above the floor", rep);

  if (rep.closed_base && params.normalize) {
    SpectralOptions opts = params.spectral;
    if (t == 0.0) opts.bach_floor = -1.0;
    const DiscreteOperator op = assemble_operator(normalized_double_deformation(g, psi, k), box, t);
    for (std::size_t n = 0; n < op.size(); ++n) rep.phi_box += op.mass[n] * op.potential[n];
    rep.trichotomy = sign_trichotomy(op, opts);
    rep.normalization = minimize_and_normalize(op, opts);
  }
  rep.success = true;
  return rep;
}

}  // namespace bachgeom
