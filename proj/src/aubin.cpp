#include "bachgeom/aubin.hpp"

#include <algorithm>
#include <cmath>

namespace bachgeom {

ScalarField scaled(const ScalarField& f, double k) {
  if (k == 1.0) return f;
  return ScalarField(
      f.label(), [f, k](const Point& p) { return k * f.taylor(p); }, [f, k](const Point& p) { return k * f.value(p); });
}

MetricTaylor deformed_jet(const MetricTaylor& g, const ScalarTaylor& f) {
  std::array<Taylor<kMetricOrder>, kDim> df;
  for (int i = 0; i < kDim; ++i) df[i] = f.diff(i);
  MetricTaylor out = g;
  for (int i = 0; i < kDim; ++i)
    for (int j = i; j < kDim; ++j) {
      out[i][j].add_product(df[i], df[j]);
      out[j][i] = out[i][j];
    }
  return out;
}

MetricField deform_metric(const MetricField& g, const DeformationSpec& spec) {
  if (!spec.f.valid()) fail(ErrorCode::kInsufficientJetOrder, "deforming function has no jets");
  const ScalarField f = scaled(spec.f, spec.k);
  auto taylor = [g, f](const Point& p) { return deformed_jet(g.taylor(p), f.taylor(p)); };
  auto value = [g, f](const Point& p) {
    const ScalarTaylor t = f.taylor(p);
    Mat4 m = g.value(p);
    Vec4 d{};
    for (int i = 0; i < kDim; ++i) d[i] = t.diff(i).value();
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) m[i][j] += d[i] * d[j];
    return m;
  };
  const Provenance prov =
      g.provenance() == Provenance::kFiniteDifference ? Provenance::kDualNumber : g.provenance();
  return MetricField::analytic(g.label() + "+df(x)df", g.domain(), taylor, value, prov);
}

InverseAndVolume deformed_inverse_and_volume(const MetricJet& jet_g, const ScalarTaylor& f) {
  const Mat4 g = jet_g.values();
  const Mat4 gi = inverse4(g);
  Vec4 d{}, up{};
  for (int i = 0; i < kDim; ++i) d[i] = f.diff(i).value();
  double s = 0.0;
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) up[i] += gi[i][j] * d[j];
    s += up[i] * d[i];
  }
  InverseAndVolume out;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) out.inv_bar[i][j] = gi[i][j] - up[i] * up[j] / (1.0 + s);
  out.vol_ratio = std::sqrt(1.0 + s);
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      double v = 0.0;
      for (int c = 0; c < kDim; ++c) v += out.inv_bar[i][c] * (g[c][j] + d[c] * d[j]);
      out.identity_residual = std::max(out.identity_residual, std::abs(v - (i == j ? 1.0 : 0.0)));
    }
  return out;
}

DeformedCurvature deformed_curvature_closed(const MetricTaylor& gjet, const ScalarTaylor& f) {
  const GeometryJets G(gjet);
  const Mat4 g = jet_values(gjet);
  const Mat4 gi = jet_values(G.ginv);
  Vec4 d{}, up{};
  for (int i = 0; i < kDim; ++i) d[i] = f.diff(i).value();
  double s = 0.0;
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) up[i] += gi[i][j] * d[j];
    s += up[i] * d[i];
  }
  const double W = 1.0 + s;

  // covariant Hessian of f and its mixed form f_i^j
  Mat4 h{}, hm{};
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      MultiIndex a{};
      ++a[i];
      ++a[j];
      double v = f.derivative(a);
      for (int k = 0; k < kDim; ++k) v -= G.gamma[k][i][j].value() * d[k];
      h[i][j] = v;
    }
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int c = 0; c < kDim; ++c) hm[i][j] += h[i][c] * gi[c][j];
  double lap = 0.0, hess_sq = 0.0, A = 0.0;
  Vec4 hu{};  // f_il f^l
  for (int i = 0; i < kDim; ++i) {
    lap += hm[i][i];
    for (int l = 0; l < kDim; ++l) hu[i] += h[i][l] * up[l];
  }
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) hess_sq += hm[i][j] * hm[j][i];
  for (int i = 0; i < kDim; ++i) A += hu[i] * up[i];
  double b = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) b += hu[i] * gi[i][j] * hu[j];

  DeformedCurvature out;
  out.vol_ratio = std::sqrt(W);
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) out.inv_bar[i][j] = gi[i][j] - up[i] * up[j] / W;
  for (int a = 0; a < kDim; ++a)
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) {
        out.G[a][i][j] = up[a] * h[i][j] / W;
        out.gamma_closed[a][i][j] = G.gamma[a][i][j].value() + out.G[a][i][j];
      }
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int l = 0; l < kDim; ++l)
        for (int t = 0; t < kDim; ++t) {
          out.ER[i][j][l][t] = (h[i][l] * h[j][t] - h[i][t] * h[j][l]) / W;
          out.riemann_closed[i][j][l][t] = G.riemann[i][j][l][t].value() + out.ER[i][j][l][t];
        }
  double ric_ff = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      double rff = 0.0;
      for (int l = 0; l < kDim; ++l)
        for (int t = 0; t < kDim; ++t) rff += G.riemann[l][i][t][j].value() * up[l] * up[t];
      double hh = 0.0;
      for (int l = 0; l < kDim; ++l) hh += h[i][l] * hm[j][l];
      out.F[i][j] = -rff / W + (lap * h[i][j] - hh) / W - (A * h[i][j] - hu[i] * hu[j]) / (W * W);
      out.ricci_closed[i][j] = G.ricci[i][j].value() + out.F[i][j];
      ric_ff += G.ricci[i][j].value() * up[i] * up[j];
    }
  out.H = -2.0 * ric_ff / W + (lap * lap - hess_sq) / W - 2.0 * (A * lap - b) / (W * W);
  out.scalar_closed = G.scalar.value() + out.H;
  (void)g;
  return out;
}

DeformedCurvature deformed_curvature_closed(const MetricField& g, const DeformationSpec& spec, const ChartPoint& p) {
  const MetricJet jet = jet_of_metric(g, p, kMetricOrder);
  return deformed_curvature_closed(jet.taylor(), scaled(spec.f, spec.k).taylor(jet.point()));
}

Mat4 bach_error(const MetricField& g, const DeformationSpec& spec, const ChartPoint& p) {
  const MetricJet jet = jet_of_metric(g, p, kMetricOrder);
  const ScalarTaylor f = scaled(spec.f, spec.k).taylor(jet.point());
  const Mat4 bar = bach_ricci_form(deformed_jet(jet.taylor(), f));
  const Mat4 base = bach_ricci_form(jet.taylor());
  Mat4 e{};
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) e[i][j] = bar[i][j] - base[i][j];
  return e;
}

namespace {

MetricTaylor scale_jet(const MetricTaylor& g, const Taylor<kMetricOrder>& psi) {
  MetricTaylor out;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) out[i][j] = psi * g[i][j];
  return out;
}

}  // namespace

double conformal_error_scaling_check(const MetricField& g, const ScalarField& psi, double k, const ChartPoint& p) {
  const MetricJet jet = jet_of_metric(g, p, kMetricOrder);
  const ScalarTaylor ps = psi.taylor(jet.point());
  if (!(ps.value() > 0.0)) fail(ErrorCode::kFactorNotPositive, "psi must be positive");
  const MetricTaylor gp = scale_jet(jet.taylor(), ps.truncate<kMetricOrder>());
  // E_{psi g}(k psi)
  const Mat4 lhs_bar = bach_ricci_form(deformed_jet(gp, k * ps));
  const Mat4 lhs_base = bach_ricci_form(gp);
  // E_g(2k sqrt psi) / psi
  const Mat4 rhs_bar = bach_ricci_form(deformed_jet(jet.taylor(), 2.0 * k * sqrt(ps)));
  const Mat4 rhs_base = bach_ricci_form(jet.taylor());
  double diff = 0.0, size = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      const double l = lhs_bar[i][j] - lhs_base[i][j];
      const double r = (rhs_bar[i][j] - rhs_base[i][j]) / ps.value();
      diff = std::max(diff, std::abs(l - r));
      size = std::max(size, std::abs(l));
    }
  return diff / (1.0 + size);
}

std::pair<double, double> scalar_integral_identity(const MetricField& g, const DeformationSpec& spec,
                                                   const ChartGrid& grid) {
  if (grid.topology() != Topology::kPeriodicBox)
    fail(ErrorCode::kNonPeriodicGrid, "the integral identity needs a closed (periodic) chart");
  for (int a = 0; a < kDim; ++a)
    if (!g.domain().periodic[a])
      fail(ErrorCode::kNonPeriodicGrid, "metric '" + g.label() + "' is not periodic on this grid");
  const ScalarField f = scaled(spec.f, spec.k);
  CompensatedSum lhs, base, corr;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Point x = grid.node(n);
    const MetricTaylor gj = g.taylor(x);
    const ScalarTaylor fj = f.taylor(x);
    const DeformedCurvature dc = deformed_curvature_closed(gj, fj);
    const Mat4 gv = jet_values(gj);
    const double dv = std::sqrt(det4(gv)) * grid.volume_weight(n);
    const Mat4 gi = inverse4(gv);
    Vec4 d{}, up{};
    for (int i = 0; i < kDim; ++i) d[i] = fj.diff(i).value();
    double s = 0.0;
    for (int i = 0; i < kDim; ++i) {
      for (int j = 0; j < kDim; ++j) up[i] += gi[i][j] * d[j];
      s += up[i] * d[i];
    }
    double rff = 0.0;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) rff += (dc.ricci_closed[i][j] - dc.F[i][j]) * up[i] * up[j];
    const double S = dc.scalar_closed - dc.H;
    if (!std::isfinite(dc.scalar_closed) || !std::isfinite(rff))
      fail(ErrorCode::kNonFiniteValue, "non-finite curvature in integral identity");
    lhs.add(dc.scalar_closed * dv);
    base.add(S * dv);
    corr.add(rff / (1.0 + s) * dv);
  }
  return {lhs.value(), base.value() - corr.value()};
}

}  // namespace bachgeom
