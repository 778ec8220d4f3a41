#include "bachgeom/conformal.hpp"

#include <algorithm>
#include <cmath>

namespace bachgeom {

namespace {

MetricTaylor scale_jet(const MetricTaylor& g, const Taylor<kMetricOrder>& s) {
  MetricTaylor out;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) out[i][j] = s * g[i][j];
  return out;
}

double max_abs(const Mat4& m) {
  double s = 0.0;
  for (const auto& r : m)
    for (double v : r) s = std::max(s, std::abs(v));
  return s;
}

double max_diff(const Mat4& a, const Mat4& b) {
  double s = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) s = std::max(s, std::abs(a[i][j] - b[i][j]));
  return s;
}

Mat4 covariant_hessian(const GeometryJets& G, const ScalarTaylor& f) {
  Mat4 h{};
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      MultiIndex a{};
      ++a[i];
      ++a[j];
      double v = f.derivative(a);
      for (int k = 0; k < kDim; ++k) v -= G.gamma[k][i][j].value() * f.diff(k).value();
      h[i][j] = v;
    }
  return h;
}

}  // namespace

ScalarTaylor conformal_multiplier(const ConformalFactor& c, const Point& p) {
  const ScalarTaylor u = c.u.taylor(p);
  if (c.convention == ConformalConvention::kExponential) return exp(2.0 * u);
  if (!(u.value() > 0.0)) fail(ErrorCode::kFactorNotPositive, "power-convention conformal factor must be positive");
  return u * u;
}

MetricField conformal_metric(const MetricField& g, const ConformalFactor& c) {
  if (!c.u.valid()) fail(ErrorCode::kInvalidArgument, "conformal factor is empty");
  auto taylor = [g, c](const Point& p) {
    return scale_jet(g.taylor(p), conformal_multiplier(c, p).truncate<kMetricOrder>());
  };
  auto value = [g, c](const Point& p) {
    const double u = c.u.value(p);
    double s;
    if (c.convention == ConformalConvention::kExponential) {
      s = std::exp(2.0 * u);
    } else {
      if (!(u > 0.0)) fail(ErrorCode::kFactorNotPositive, "power-convention conformal factor must be positive");
      s = u * u;
    }
    Mat4 m = g.value(p);
    for (auto& r : m)
      for (double& v : r) v *= s;
    return m;
  };
  const Provenance prov = g.provenance() == Provenance::kFiniteDifference ? Provenance::kDualNumber : g.provenance();
  return MetricField::analytic(g.label() + "*conformal", g.domain(), taylor, value, prov);
}

ConformalLaws conformal_curvature_laws(const MetricField& g, const ScalarField& psi, const ChartPoint& p) {
  const MetricJet jet = jet_of_metric(g, p, kMetricOrder);
  const ScalarTaylor ps = psi.taylor(jet.point());
  const double s = ps.value();
  if (!(s > 0.0)) fail(ErrorCode::kFactorNotPositive, "psi must be positive");
  const GeometryJets G(jet.taylor());
  const MetricTaylor gp_jet = scale_jet(jet.taylor(), ps.truncate<kMetricOrder>());
  const GeometryJets Gp(gp_jet);

  const Mat4 gv = jet.values();
  const Mat4 gi = jet_values(G.ginv);
  Vec4 d{};
  for (int i = 0; i < kDim; ++i) d[i] = ps.diff(i).value();
  double grad2 = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) grad2 += gi[i][j] * d[i] * d[j];
  const Mat4 h = covariant_hessian(G, ps);
  double lap = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) lap += gi[i][j] * h[i][j];

  ConformalLaws out;
  out.scalar_closed = (G.scalar.value() - 3.0 * lap / s + 1.5 * grad2 / (s * s)) / s;
  out.scalar_direct = Gp.scalar.value();
  const Mat4 bach = bach_ricci_form(jet.taylor());
  out.bach_direct = bach_ricci_form(gp_jet);
  out.hessian_direct = covariant_hessian(Gp, ps);
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      out.ricci_closed[i][j] = G.ricci[i][j].value() - h[i][j] / s + 1.5 * d[i] * d[j] / (s * s) -
                               0.5 * lap / s * gv[i][j];
      out.ricci_direct[i][j] = Gp.ricci[i][j].value();
      out.bach_closed[i][j] = bach[i][j] / s;
      out.hessian_closed[i][j] = h[i][j] - (d[i] * d[j] - 0.5 * grad2 * gv[i][j]) / s;
    }
  out.volume_ratio_closed = s * s;
  out.volume_ratio_direct = std::sqrt(det4(jet_values(gp_jet)) / det4(gv));

  double r = std::abs(out.scalar_closed - out.scalar_direct) / (1.0 + std::abs(out.scalar_direct));
  r = std::max(r, max_diff(out.ricci_closed, out.ricci_direct) / (1.0 + max_abs(out.ricci_direct)));
  r = std::max(r, max_diff(out.bach_closed, out.bach_direct) / (1.0 + max_abs(out.bach_direct)));
  r = std::max(r, std::abs(out.volume_ratio_closed - out.volume_ratio_direct) / (1.0 + out.volume_ratio_direct));
  r = std::max(r, max_diff(out.hessian_closed, out.hessian_direct) / (1.0 + max_abs(out.hessian_direct)));
  out.residual = r;
  return out;
}

MixedCurvatureScalar scalar_bach(const MetricTaylor& g, double t) {
  const PointCurvature pc = point_curvature(g);
  MixedCurvatureScalar out;
  out.t = t;
  out.scalar = pc.scalar;
  out.bach_norm = pc.bach_norm;
  out.value = pc.scalar + t * std::sqrt(pc.bach_norm);
  return out;
}

MixedCurvatureScalar scalar_bach(const MetricField& g, const ChartPoint& p, double t) {
  return scalar_bach(jet_of_metric(g, p, kMetricOrder).taylor(), t);
}

double laplacian(const MetricTaylor& g, const ScalarTaylor& phi) {
  const Mat4 gv = jet_values(g);
  const Mat4 gi = inverse4(gv);
  // Gamma^k contracted with g^ij, from first derivatives of g only
  Vec4 d{};
  for (int k = 0; k < kDim; ++k) d[k] = phi.diff(k).value();
  double lap = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      MultiIndex a{};
      ++a[i];
      ++a[j];
      lap += gi[i][j] * phi.derivative(a);
    }
  // g^ij Gamma^k_ij = g^ij g^kl (d_i g_jl - d_l g_ij / 2)
  for (int k = 0; k < kDim; ++k) {
    double c = 0.0;
    for (int l = 0; l < kDim; ++l)
      for (int i = 0; i < kDim; ++i)
        for (int j = 0; j < kDim; ++j) {
          const double gij = gi[i][j];
          if (gij == 0.0) continue;
          c += gij * gi[k][l] * (g[j][l].diff(i).value() - 0.5 * g[i][j].diff(l).value());
        }
    lap -= c * d[k];
  }
  return lap;
}

double gradient_norm_sq(const MetricTaylor& g, const ScalarTaylor& phi) {
  const Mat4 gi = inverse4(jet_values(g));
  double s = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) s += gi[i][j] * phi.diff(i).value() * phi.diff(j).value();
  return s;
}

double modified_laplacian_apply(const MetricTaylor& g, double t, const ScalarTaylor& phi) {
  return -6.0 * laplacian(g, phi) + scalar_bach(g, t).value * phi.value();
}

double modified_laplacian_apply(const MetricField& g, double t, const ScalarField& phi, const ChartPoint& p) {
  const MetricJet jet = jet_of_metric(g, p, kMetricOrder);
  return modified_laplacian_apply(jet.taylor(), t, phi.taylor(jet.point()));
}

CovarianceResidual covariance_residual(const MetricField& g, const ScalarField& u, double t, const ScalarField& phi,
                                       const ChartPoint& p) {
  const MetricJet jet = jet_of_metric(g, p, kMetricOrder);
  const ScalarTaylor uj = u.taylor(jet.point());
  if (!(uj.value() > 0.0)) fail(ErrorCode::kFactorNotPositive, "conformal factor u must be positive");
  const ScalarTaylor pj = phi.taylor(jet.point());
  const MetricTaylor gt = scale_jet(jet.taylor(), (uj * uj).truncate<kMetricOrder>());
  const double u3 = uj.value() * uj.value() * uj.value();
  const double lhs_op = modified_laplacian_apply(gt, t, pj);
  const double l_phiu = modified_laplacian_apply(jet.taylor(), t, pj * uj);
  const double rhs_op = l_phiu / u3;
  const double lhs_pot = scalar_bach(gt, t).value;
  const double rhs_pot = modified_laplacian_apply(jet.taylor(), t, uj) / u3;
  CovarianceResidual out;
  out.operator_residual = std::abs(lhs_op - rhs_op);
  out.potential_residual = std::abs(lhs_pot - rhs_pot);
  out.scale = 1.0 + std::abs(l_phiu);
  return out;
}

BachCovarianceResidual bach_covariance_residual(const MetricField& g, const ConformalFactor& c, const ChartPoint& p) {
  const MetricJet jet = jet_of_metric(g, p, kMetricOrder);
  const ScalarTaylor m = conformal_multiplier(c, jet.point());
  const MetricTaylor gt = scale_jet(jet.taylor(), m.truncate<kMetricOrder>());
  const PointCurvature base = point_curvature(jet.taylor());
  const PointCurvature tilde = point_curvature(gt);
  const double s = m.value();
  Mat4 expected{};
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) expected[i][j] = base.bach[i][j] / s;
  BachCovarianceResidual out;
  out.component_abs = max_diff(tilde.bach, expected);
  out.component_rel = out.component_abs / std::max(max_abs(expected), 1e-300);
  // u^8 |B~|^2 with u^2 = s
  const double lhs = s * s * s * s * tilde.bach_norm * tilde.bach_norm;
  const double rhs = base.bach_norm * base.bach_norm;
  out.norm_abs = std::abs(lhs - rhs);
  out.norm_rel = out.norm_abs / std::max(rhs, 1e-300);
  return out;
}

}  // namespace bachgeom
