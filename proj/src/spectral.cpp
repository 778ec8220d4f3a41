#include "bachgeom/spectral.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace bachgeom {

namespace {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

void require_periodic(const MetricField& g, const ChartGrid& grid) {
  if (grid.topology() != Topology::kPeriodicBox)
    fail(ErrorCode::kNonPeriodicGrid, "the discrete operator needs a periodic box grid");
  const ChartDomain& d = g.domain();
  for (int a = 0; a < kDim; ++a) {
    if (!d.periodic[a])
      fail(ErrorCode::kNonPeriodicGrid, "metric '" + g.label() + "' is not periodic along axis " + std::to_string(a));
    if (std::abs((d.hi[a] - d.lo[a]) - grid.extents()[a]) > 1e-12 * grid.extents()[a])
      fail(ErrorCode::kNonPeriodicGrid, "grid extent does not match the metric period along axis " + std::to_string(a));
  }
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

// Conjugate gradients on an SPD matrix with a strict tolerance.
Vec cg_solve(const SpMat& A, const Vec& b, double tol, int max_iter, bool* ok = nullptr) {
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(tol);
  cg.setMaxIterations(max_iter);
  cg.compute(A);
  Vec x = cg.solve(b);
  const bool good = cg.info() == Eigen::Success;
  if (ok) *ok = good;
  return x;
}

}  // namespace

const char* sign_class_name(SignClass c) {
  switch (c) {
    case SignClass::kPositive: return "positive";
    case SignClass::kNegative: return "negative";
    case SignClass::kZero: return "zero";
  }
  return "unknown";
}

Vec DiscreteOperator::laplacian_part(const Vec& u) const {
  Vec k = stiffness * u;
  for (Eigen::Index n = 0; n < k.size(); ++n) k[n] *= 6.0 / mass[n];
  return k;
}

Vec DiscreteOperator::apply(const Vec& u) const {
  Vec r = laplacian_part(u);
  for (Eigen::Index n = 0; n < r.size(); ++n) r[n] += potential[n] * u[n];
  return r;
}

double DiscreteOperator::constant_annihilation() const {
  const Vec r = laplacian_part(Vec::Ones(static_cast<Eigen::Index>(size())));
  return r.cwiseAbs().maxCoeff();
}

double DiscreteOperator::self_adjointness_residual() const {
  // M L = 6 K + M diag(F); only K can break symmetry
  const SpMat kt = stiffness.transpose();
  const SpMat d = stiffness - kt;
  double defect = 0.0, scale = 0.0;
  for (int c = 0; c < d.outerSize(); ++c)
    for (SpMat::InnerIterator it(d, c); it; ++it) defect = std::max(defect, std::abs(it.value()));
  for (int c = 0; c < stiffness.outerSize(); ++c)
    for (SpMat::InnerIterator it(stiffness, c); it; ++it) scale = std::max(scale, std::abs(it.value()));
  return defect / std::max(scale, 1e-300);
}

DiscreteOperator assemble_operator(const MetricField& g, const ChartGrid& grid, double t, const PotentialHook& hook) {
  require_periodic(g, grid);
  const std::size_t N = grid.size();
  DiscreteOperator op;
  op.grid = grid;
  op.t = t;
  op.metric_label = g.label();
  op.potential_from_hook = static_cast<bool>(hook.replace);
  op.mass.resize(N);
  op.potential.resize(N);
  op.scalar.resize(N);
  op.ginv.resize(N);
  op.gamma_trace.resize(N);
  if (!op.potential_from_hook) op.bach_norm.resize(N);
  std::vector<Mat4> A(N);
  op.min_bach_norm = std::numeric_limits<double>::infinity();

  for (std::size_t n = 0; n < N; ++n) {
    const Point x = grid.node(n);
    const MetricTaylor gj = g.taylor(x);
    const Mat4 gv = jet_values(gj);
    const double det = det4(gv);
    if (!(det > 0.0) || !(min_eigenvalue(gv) > 0.0))
      fail(ErrorCode::kPdViolation, "metric not positive definite at a grid node");
    const Mat4 gi = inverse4(gv);
    const double sq = std::sqrt(det);
    op.mass[n] = sq * grid.volume_weight(n);
    op.ginv[n] = gi;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) A[n][i][j] = sq * gi[i][j];
    Vec4 tr{};
    for (int k = 0; k < kDim; ++k)
      for (int l = 0; l < kDim; ++l)
        for (int i = 0; i < kDim; ++i)
          for (int j = 0; j < kDim; ++j)
            tr[k] += gi[i][j] * gi[k][l] * (gj[j][l].diff(i).value() - 0.5 * gj[i][j].diff(l).value());
    op.gamma_trace[n] = tr;
    if (op.potential_from_hook) {
      op.potential[n] = hook.replace(x) + hook.shift;
      op.scalar[n] = std::numeric_limits<double>::quiet_NaN();
    } else {
      const PointCurvature pc = point_curvature(gj);
      op.scalar[n] = pc.scalar;
      op.bach_norm[n] = pc.bach_norm;
      op.min_bach_norm = std::min(op.min_bach_norm, pc.bach_norm);
      op.potential[n] = pc.scalar + t * std::sqrt(pc.bach_norm) + hook.shift;
    }
    if (!std::isfinite(op.potential[n])) fail(ErrorCode::kNonFiniteValue, "non-finite potential at a grid node");
  }
  if (op.potential_from_hook) op.min_bach_norm = std::numeric_limits<double>::quiet_NaN();

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(N * 48);
  std::array<double, kDim> h{};
  for (int a = 0; a < kDim; ++a) h[a] = grid.spacing(a);
  for (std::size_t n = 0; n < N; ++n) {
    const auto m = grid.multi_index(n);
    const double w = grid.volume_weight(n);
    std::array<int, kDim> plus{}, minus{};
    for (int i = 0; i < kDim; ++i) {
      auto mp = m, mm = m;
      ++mp[i];
      --mm[i];
      plus[i] = static_cast<int>(grid.linear_index(mp));
      minus[i] = static_cast<int>(grid.linear_index(mm));
    }
    const int nn = static_cast<int>(n);
    auto pair_term = [&trip](int a, int b, double c) {
      trip.emplace_back(a, a, c);
      trip.emplace_back(b, b, c);
      trip.emplace_back(a, b, -c);
      trip.emplace_back(b, a, -c);
    };
    for (int i = 0; i < kDim; ++i) {
      const double c = w * 0.5 * A[n][i][i] / (h[i] * h[i]);
      pair_term(nn, plus[i], c);
      pair_term(nn, minus[i], c);
    }
    for (int i = 0; i < kDim; ++i)
      for (int j = i + 1; j < kDim; ++j) {
        const double c = w * A[n][i][j] / (4.0 * h[i] * h[j]);
        if (c == 0.0) continue;
        const std::array<std::pair<int, double>, 2> u{{{plus[i], 1.0}, {minus[i], -1.0}}};
        const std::array<std::pair<int, double>, 2> v{{{plus[j], 1.0}, {minus[j], -1.0}}};
        for (const auto& [a, sa] : u)
          for (const auto& [b, sb] : v) {
            trip.emplace_back(a, b, c * sa * sb);
            trip.emplace_back(b, a, c * sa * sb);
          }
      }
  }
  op.stiffness.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  op.stiffness.setFromTriplets(trip.begin(), trip.end());
  op.stiffness.makeCompressed();
  return op;
}

EigenResult principal_eigenpair(const DiscreteOperator& op, const SpectralOptions& opts) {
  const auto N = static_cast<Eigen::Index>(op.size());
  Vec sq(N), isq(N);
  for (Eigen::Index n = 0; n < N; ++n) {
    sq[n] = std::sqrt(op.mass[n]);
    isq[n] = 1.0 / sq[n];
  }
  const double sigma = *std::min_element(op.potential.begin(), op.potential.end()) - 1.0;
  // symmetric form S = 6 M^-1/2 K M^-1/2 + diag(F)
  SpMat S = isq.asDiagonal() * op.stiffness * isq.asDiagonal();
  S *= 6.0;
  Vec diag(N);
  for (Eigen::Index n = 0; n < N; ++n) diag[n] = op.potential[n];
  SpMat D(N, N);
  D.reserve(Eigen::VectorXi::Constant(N, 1));
  for (Eigen::Index n = 0; n < N; ++n) D.insert(n, n) = diag[n];
  S += D;
  SpMat shifted = S;
  for (Eigen::Index n = 0; n < N; ++n) shifted.coeffRef(n, n) -= sigma;

  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-14);
  cg.setMaxIterations(20000);
  cg.compute(shifted);

  Vec x = sq;  // phi = 1
  x.normalize();
  EigenResult res;
  double mu = x.dot(S * x);
  for (int it = 1; it <= opts.max_iterations; ++it) {
    Vec y = cg.solve(x);
    if (!y.allFinite()) fail(ErrorCode::kNoConvergence, "inner solve failed in inverse iteration");
    x = y / y.norm();
    if (x.sum() < 0.0) x = -x;
    const Vec sx = S * x;
    mu = x.dot(sx);
    const double r = (sx - mu * x).norm();
    res.iterations = it;
    res.residual = r;
    if (r <= opts.eig_tol) break;
    if (it == opts.max_iterations)
      fail(ErrorCode::kNoConvergence, "inverse iteration did not converge, residual " + std::to_string(r));
  }
  res.mu = mu;
  res.phi = isq.asDiagonal() * x;
  if (res.phi.minCoeff() <= 0.0) fail(ErrorCode::kPositivityLost, "principal eigenfunction is not positive");
  return res;
}

TrichotomyResult sign_trichotomy(const DiscreteOperator& op, const SpectralOptions& opts) {
  if (!op.potential_from_hook && !(op.min_bach_norm > opts.bach_floor))
    fail(ErrorCode::kBachVanishes,
         "grid-minimum Bach norm " + std::to_string(op.min_bach_norm) + " is not above the floor");
  TrichotomyResult out;
  out.eigen = principal_eigenpair(op, opts);
  const double mu = out.eigen.mu;
  out.sign = mu > opts.zero_tol ? SignClass::kPositive : (mu < -opts.zero_tol ? SignClass::kNegative : SignClass::kZero);
  const Vec& phi = out.eigen.phi;
  const Vec lphi = op.apply(phi);
  out.normalized_potential.resize(op.size());
  for (std::size_t n = 0; n < op.size(); ++n) {
    const double p = phi[static_cast<Eigen::Index>(n)];
    out.normalized_potential[n] = mu / (p * p);
    const double law = lphi[static_cast<Eigen::Index>(n)] / (p * p * p);
    out.law_residual = std::max(out.law_residual, std::abs(law - out.normalized_potential[n]));
  }
  return out;
}

TrichotomyResult sign_trichotomy(const MetricField& g, const ChartGrid& grid, double t, const SpectralOptions& opts) {
  return sign_trichotomy(assemble_operator(g, grid, t), opts);
}

double yamabe_bach_functional(const Vec& u, const DiscreteOperator& op) {
  if (u.size() != static_cast<Eigen::Index>(op.size())) fail(ErrorCode::kInvalidArgument, "vector size mismatch");
  const Vec mlu = 6.0 * (op.stiffness * u);
  CompensatedSum num, den;
  for (Eigen::Index n = 0; n < u.size(); ++n) {
    num.add(u[n] * (mlu[n] + op.mass[n] * op.potential[n] * u[n]));
    const double u2 = u[n] * u[n];
    den.add(op.mass[n] * u2 * u2);
  }
  if (!(den.value() > 0.0)) fail(ErrorCode::kZeroDenominator, "the quartic integral vanishes");
  return num.value() / den.value();
}

namespace {

struct Quartic {
  const DiscreteOperator& op;
  Vec mass;
  Vec pot;

  explicit Quartic(const DiscreteOperator& o) : op(o), mass(to_vec(o.mass)), pot(to_vec(o.potential)) {}

  // M L u
  Vec mlu(const Vec& u) const { return 6.0 * (op.stiffness * u) + (mass.array() * pot.array() * u.array()).matrix(); }
  double J(const Vec& u) const { return u.dot(mlu(u)); }
  double N(const Vec& u) const { return (mass.array() * u.array().pow(4)).sum(); }
  Vec normalize(const Vec& u) const { return u / std::pow(N(u), 0.25); }
};

std::vector<double> to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

NormalizationReport minimize_and_normalize(const DiscreteOperator& op, const SpectralOptions& opts) {
  if (!op.potential_from_hook && !(op.min_bach_norm > opts.bach_floor))
    fail(ErrorCode::kBachVanishes,
         "grid-minimum Bach norm " + std::to_string(op.min_bach_norm) + " is not above the floor");
  NormalizationReport rep;
  const EigenResult eig = principal_eigenpair(op, opts);
  const Quartic Q(op);
  // integral of F^B phi^2 + 6 |d phi|^2 for the probe phi
  rep.integral_condition = Q.J(eig.phi);
  if (!(rep.integral_condition < 0.0))
    fail(ErrorCode::kHypothesisFailed, "integral condition is not negative: " + std::to_string(rep.integral_condition));

  const auto Nn = static_cast<Eigen::Index>(op.size());
  Vec u = Q.normalize(eig.phi);
  double J = Q.J(u);
  rep.initial_functional = J;
  rep.functional_history.push_back(J);

  // H1-preconditioned projected gradient on {sum M u^4 = 1}
  SpMat pre = 6.0 * op.stiffness;
  for (Eigen::Index n = 0; n < Nn; ++n) pre.coeffRef(n, n) += Q.mass[n];
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg_pre;
  cg_pre.setTolerance(1e-10);
  cg_pre.compute(pre);
  double alpha = 1.0;
  for (int step = 0; step < opts.descent_steps; ++step) {
    // gradient of J / sqrt(N) at N = 1 is 2 (M L u - J M u^3)
    const Vec grad = 2.0 * (Q.mlu(u) - J * (Q.mass.array() * u.array().cube()).matrix());
    const Vec dir = -cg_pre.solve(grad);
    const double slope = grad.dot(dir);
    if (!(slope < 0.0) || std::abs(slope) < 1e-24 * std::max(1.0, std::abs(J))) break;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      const Vec trial = u + alpha * dir;
      if (trial.minCoeff() > 0.0) {
        const Vec cand = Q.normalize(trial);
        const double Jc = Q.J(cand);
        if (Jc <= J + 1e-4 * alpha * slope && Jc < J) {
          u = cand;
          J = Jc;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (rep.descent_steps == 0 && std::abs(slope) > 1e-12 * std::abs(J))
        fail(ErrorCode::kDescentStalled, "no admissible descent step from the initial point");
      break;
    }
    ++rep.descent_steps;
    if (rep.functional_history.back() <= J) rep.monotone = false;
    const double prev = rep.functional_history.back();
    rep.functional_history.push_back(J);
    alpha = std::min(1.0, 2.0 * alpha);
    if (std::abs(prev - J) <= 1e-13 * std::abs(J)) break;
  }

  // Newton on M L w = K M w^3 with sum M w^4 = 1 (bordered system by block elimination)
  Vec w = u;
  double K = J;
  auto el = [&](const Vec& ww, double KK) {
    const Vec r = Q.mlu(ww) - KK * (Q.mass.array() * ww.array().cube()).matrix();
    return r;
  };
  auto scaled_residual = [&](const Vec& r, double KK) {
    return std::sqrt(std::abs(KK)) * (r.array() / Q.mass.array()).abs().maxCoeff();
  };
  Vec r1 = el(w, K);
  double res = scaled_residual(r1, K);
  for (int it = 0; it < opts.newton_steps && res > opts.newton_tol; ++it) {
    SpMat A = 6.0 * op.stiffness;
    for (Eigen::Index n = 0; n < Nn; ++n)
      A.coeffRef(n, n) += Q.mass[n] * (Q.pot[n] - 3.0 * K * w[n] * w[n]);
    const Vec b = (Q.mass.array() * w.array().cube()).matrix();
    const double r2 = Q.N(w) - 1.0;
    bool ok1 = false, ok2 = false;
    Vec a = cg_solve(A, -r1, 1e-14, 20000, &ok1);
    Vec c = cg_solve(A, b, 1e-14, 20000, &ok2);
    if (!ok1 || !ok2) {
      Eigen::BiCGSTAB<SpMat> bi;
      bi.setTolerance(1e-14);
      bi.compute(A);
      a = bi.solve(-r1);
      c = bi.solve(b);
      if (bi.info() != Eigen::Success) fail(ErrorCode::kNoConvergence, "Newton linear solve failed");
    }
    const double dK = (-0.25 * r2 - b.dot(a)) / b.dot(c);
    w += a + dK * c;
    K += dK;
    if (w.minCoeff() <= 0.0) fail(ErrorCode::kPositivityLost, "Newton iterate lost positivity");
    r1 = el(w, K);
    const double nres = scaled_residual(r1, K);
    ++rep.newton_steps;
    if (!(nres < res) && nres > opts.newton_tol) {
      res = nres;
      break;
    }
    res = nres;
  }
  if (!(K < 0.0)) fail(ErrorCode::kHypothesisFailed, "Euler-Lagrange constant is not negative");
  rep.K = K;
  rep.final_functional = Q.J(w);
  rep.v = std::sqrt(-K) * w;
  const Vec lv = op.apply(rep.v);
  rep.el_residual = (lv.array() + rep.v.array().cube()).abs().maxCoeff();
  rep.deviation = (lv.array() / rep.v.array().cube() + 1.0).abs().maxCoeff();

  // continuum check: v^-3 (-6 Lap_g v + F^B v) with spectral derivatives of the interpolant
  const ChartGrid& grid = op.grid;
  const std::vector<double> vs = to_std(rep.v);
  std::array<std::vector<double>, kDim> d1;
  for (int a = 0; a < kDim; ++a) d1[a] = spectral_derivative(vs, grid, a);
  std::vector<double> lap(op.size(), 0.0);
  for (int a = 0; a < kDim; ++a)
    for (int b = a; b < kDim; ++b) {
      const std::vector<double> d2 = spectral_derivative(d1[a], grid, b);
      for (std::size_t n = 0; n < op.size(); ++n) lap[n] += (a == b ? 1.0 : 2.0) * op.ginv[n][a][b] * d2[n];
    }
  double dev = 0.0;
  for (std::size_t n = 0; n < op.size(); ++n) {
    double l = lap[n];
    for (int k = 0; k < kDim; ++k) l -= op.gamma_trace[n][k] * d1[k][n];
    const double v = vs[n];
    dev = std::max(dev, std::abs((-6.0 * l + op.potential[n] * v) / (v * v * v) + 1.0));
  }
  rep.continuum_deviation = dev;
  return rep;
}

std::vector<double> spectral_derivative(const std::vector<double>& f, const ChartGrid& grid, int axis) {
  if (grid.topology() != Topology::kPeriodicBox) fail(ErrorCode::kNonPeriodicGrid, "spectral derivative needs a box");
  if (f.size() != grid.size()) fail(ErrorCode::kInvalidArgument, "value count does not match grid");
  const int n = grid.resolution()[axis];
  const double L = grid.extents()[axis];
  // periodic differentiation matrix for the trigonometric interpolant
  std::vector<double> D(static_cast<std::size_t>(n) * n, 0.0);
  const double h = 2.0 * std::numbers::pi / n;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      const int d = j - k;
      const double sgn = (d % 2 == 0) ? 1.0 : -1.0;
      double v = (n % 2 == 0) ? 0.5 * sgn / std::tan(0.5 * d * h) : 0.5 * sgn / std::sin(0.5 * d * h);
      D[static_cast<std::size_t>(j) * n + k] = v * 2.0 * std::numbers::pi / L;
    }
  std::size_t stride = 1;
  for (int a = kDim - 1; a > axis; --a) stride *= static_cast<std::size_t>(grid.resolution()[a]);
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t base = 0; base < f.size(); ++base) {
    const std::size_t pos = (base / stride) % static_cast<std::size_t>(n);
    if (pos != 0) continue;
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += D[static_cast<std::size_t>(j) * n + k] * f[base + k * stride];
      out[base + j * stride] = s;
    }
  }
  return out;
}

double flat_first_eigenvalue(const ChartGrid& grid) {
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < kDim; ++a) {
    const double h = grid.spacing(a);
    const double s = std::sin(std::numbers::pi / grid.resolution()[a]);
    best = std::min(best, 4.0 * s * s / (h * h));
  }
  return best;
}

std::pair<double, double> conformal_integral_identity(const MetricField& g, const ScalarField& u, double t,
                                            const ChartGrid& grid) {
  require_periodic(g, grid);
  CompensatedSum lhs, rhs;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Point x = grid.node(n);
    const MetricTaylor gj = g.taylor(x);
    const ScalarTaylor uj = u.taylor(x);
    if (!(uj.value() > 0.0)) fail(ErrorCode::kFactorNotPositive, "u must be positive");
    const Taylor<kMetricOrder> u2 = (uj * uj).truncate<kMetricOrder>();
    MetricTaylor gp;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) gp[i][j] = u2 * gj[i][j];
    const double w = grid.volume_weight(n);
    const double dv = std::sqrt(det4(jet_values(gj))) * w;
    const double dvp = std::sqrt(det4(jet_values(gp))) * w;
    const double fp = scalar_bach(gp, t).value;
    const double f = scalar_bach(gj, t).value;
    const double uv = uj.value();
    lhs.add(fp * dvp);
    rhs.add((f * uv * uv + 6.0 * gradient_norm_sq(gj, uj)) * dv);
  }
  return {lhs.value(), rhs.value()};
}

}  // namespace bachgeom
