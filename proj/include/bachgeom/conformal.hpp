#pragma once

// Conformal changes, scalar-Bach curvature and the modified conformal Laplacian.

#include <algorithm>

#include "bachgeom/curvature.hpp"

namespace bachgeom {

enum class ConformalConvention {
  kExponential,  ///< g~ = exp(2u) g
  kPower,        ///< g~ = u^2 g, u > 0
};

struct ConformalFactor {
  ScalarField u;
  ConformalConvention convention = ConformalConvention::kExponential;
};

/// The multiplier exp(2u) or u^2 at p, as a jet.
ScalarTaylor conformal_multiplier(const ConformalFactor& c, const Point& p);

MetricField conformal_metric(const MetricField& g, const ConformalFactor& c);

/// Closed-form laws for g' = psi g next to the same quantities computed directly.
struct ConformalLaws {
  double scalar_closed = 0.0, scalar_direct = 0.0;
  Mat4 ricci_closed{}, ricci_direct{};
  Mat4 bach_closed{}, bach_direct{};
  double volume_ratio_closed = 0.0, volume_ratio_direct = 0.0;
  Mat4 hessian_closed{}, hessian_direct{};
  /// max over laws of |closed - direct| / (1 + max |direct|)
  double residual = 0.0;
};

ConformalLaws conformal_curvature_laws(const MetricField& g, const ScalarField& psi, const ChartPoint& p);

struct MixedCurvatureScalar {
  double value = 0.0;
  double scalar = 0.0;
  double bach_norm = 0.0;
  double t = 0.0;
};

MixedCurvatureScalar scalar_bach(const MetricField& g, const ChartPoint& p, double t);
MixedCurvatureScalar scalar_bach(const MetricTaylor& g, double t);

/// Laplace-Beltrami of phi at the expansion point.
double laplacian(const MetricTaylor& g, const ScalarTaylor& phi);
/// |d phi|^2_g at the expansion point.
double gradient_norm_sq(const MetricTaylor& g, const ScalarTaylor& phi);

/// -6 Lap_g phi + F^B_g phi at p.
double modified_laplacian_apply(const MetricField& g, double t, const ScalarField& phi, const ChartPoint& p);
double modified_laplacian_apply(const MetricTaylor& g, double t, const ScalarTaylor& phi);

struct CovarianceResidual {
  /// |L_{g~} phi - u^-3 L_g(phi u)|
  double operator_residual = 0.0;
  /// |F^B_{g~} - u^-3 L_g u|
  double potential_residual = 0.0;
  /// 1 + |L_g(phi u)|
  double scale = 1.0;
  double value() const { return std::max(operator_residual, potential_residual); }
};

/// Power convention g~ = u^2 g.
CovarianceResidual covariance_residual(const MetricField& g, const ScalarField& u, double t, const ScalarField& phi,
                                       const ChartPoint& p);

struct BachCovarianceResidual {
  double component_abs = 0.0;
  double component_rel = 0.0;
  double norm_abs = 0.0;
  double norm_rel = 0.0;
};

BachCovarianceResidual bach_covariance_residual(const MetricField& g, const ConformalFactor& c, const ChartPoint& p);

}  // namespace bachgeom
