#pragma once

// Aubin's deformation gbar = g + k^2 df (x) df and its closed-form curvature.

#include <string>
#include <utility>

#include "bachgeom/curvature.hpp"

namespace bachgeom {

struct DeformationSpec {
  ScalarField f;
  /// The metric is deformed by d(k f) (x) d(k f).
  double k = 1.0;
  std::string label;
};

struct DeformedCurvature {
  Tensor4 riemann_closed{};
  Mat4 ricci_closed{};
  double scalar_closed = 0.0;
  Tensor4 ER{};
  Mat4 F{};
  double H = 0.0;
  /// G[a][b][c] = f^a f_bc / (1 + |df|^2)
  Tensor3 G{};
  Tensor3 gamma_closed{};
  Mat4 inv_bar{};
  double vol_ratio = 1.0;
};

struct InverseAndVolume {
  Mat4 inv_bar{};
  double vol_ratio = 1.0;
  /// max |gbar^-1 gbar - Id|
  double identity_residual = 0.0;
};

/// Jet of gbar at a point from jets of g and of the (already scaled) deforming function.
MetricTaylor deformed_jet(const MetricTaylor& g, const ScalarTaylor& f);

MetricField deform_metric(const MetricField& g, const DeformationSpec& spec);

InverseAndVolume deformed_inverse_and_volume(const MetricJet& jet_g, const ScalarTaylor& f);

DeformedCurvature deformed_curvature_closed(const MetricField& g, const DeformationSpec& spec, const ChartPoint& p);
/// Same from jets; f must already include the factor k.
DeformedCurvature deformed_curvature_closed(const MetricTaylor& g, const ScalarTaylor& f);

/// B(gbar) - B(g) at p.
Mat4 bach_error(const MetricField& g, const DeformationSpec& spec, const ChartPoint& p);

/// max_ij |E_{psi g}(k psi) - E_g(2k sqrt(psi)) / psi|, relative to 1 + max |E_{psi g}(k psi)|.
double conformal_error_scaling_check(const MetricField& g, const ScalarField& psi, double k, const ChartPoint& p);

/// (integral of Sbar dV_g, integral of S dV_g - integral of Ric(df, df)/(1+|df|^2) dV_g) over a periodic grid.
std::pair<double, double> scalar_integral_identity(const MetricField& g, const DeformationSpec& spec,
                                                   const ChartGrid& grid);

/// The scalar field k f.
ScalarField scaled(const ScalarField& f, double k);

}  // namespace bachgeom
