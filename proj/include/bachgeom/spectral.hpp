#pragma once

// Discrete modified conformal Laplacian on periodic boxes, its principal eigenpair,
// the Yamabe-type quotient and the constant scalar-Bach normalization.

#include <Eigen/Sparse>
#include <functional>
#include <string>
#include <vector>

#include "bachgeom/conformal.hpp"

namespace bachgeom {

struct SpectralOptions {
  double eig_tol = 1e-9;
  int max_iterations = 10000;
  double bach_floor = 1e-8;
  double zero_tol = 1e-6;
  /// EL residual target for the Newton stage.
  double newton_tol = 1e-10;
  int descent_steps = 200;
  int newton_steps = 40;
};

/// Test hooks replacing or shifting the F^B potential.
struct PotentialHook {
  std::function<double(const Point&)> replace;
  double shift = 0.0;
};

/// L = -6 Lap_h + diag(potential), with Lap_h = -M^-1 K.
///
/// K is the stiffness matrix of the discrete Dirichlet energy
///   sum_n w_n [ sum_i A^ii ((D+_i u)^2 + (D-_i u)^2) / 2 + sum_{i != j} A^ij Dc_i u Dc_j u ],
/// A = sqrt(det g) g^-1, which is positive semidefinite with the constants as its kernel.
/// M = diag(sqrt(det g) w) so that M L is symmetric.
struct DiscreteOperator {
  ChartGrid grid;
  Eigen::SparseMatrix<double> stiffness;
  std::vector<double> mass;
  std::vector<double> potential;
  std::vector<double> scalar;
  std::vector<double> bach_norm;
  /// g^-1 and g^ij Gamma^k_ij at the nodes.
  std::vector<Mat4> ginv;
  std::vector<Vec4> gamma_trace;
  double min_bach_norm = 0.0;
  bool potential_from_hook = false;
  std::string metric_label;
  double t = 0.0;

  std::size_t size() const { return mass.size(); }
  /// L u
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
  /// -6 Lap_h u
  Eigen::VectorXd laplacian_part(const Eigen::VectorXd& u) const;
  /// max_n |row sum of the Laplacian part| and the symmetry defect of M L.
  double constant_annihilation() const;
  double self_adjointness_residual() const;
};

DiscreteOperator assemble_operator(const MetricField& g, const ChartGrid& grid, double t,
                                   const PotentialHook& hook = {});

struct EigenResult {
  double mu = 0.0;
  /// Positive, normalized so that sum M phi^2 = 1.
  Eigen::VectorXd phi;
  int iterations = 0;
  double residual = 0.0;
};

EigenResult principal_eigenpair(const DiscreteOperator& op, const SpectralOptions& opts = {});

enum class SignClass { kPositive, kNegative, kZero };
const char* sign_class_name(SignClass c);

struct TrichotomyResult {
  SignClass sign = SignClass::kZero;
  EigenResult eigen;
  /// F^B of phi^2 g at the nodes, from the discrete conformal law mu phi^-2.
  std::vector<double> normalized_potential;
  /// max_n |phi^-3 L phi - mu phi^-2|
  double law_residual = 0.0;
};

TrichotomyResult sign_trichotomy(const DiscreteOperator& op, const SpectralOptions& opts = {});
TrichotomyResult sign_trichotomy(const MetricField& g, const ChartGrid& grid, double t,
                                 const SpectralOptions& opts = {});

/// sum u L u M / sum M u^4 (dV_g-weighted quadrature of both integrals).
double yamabe_bach_functional(const Eigen::VectorXd& u, const DiscreteOperator& op);

struct NormalizationReport {
  /// Solution with the sign constant scaled to -1: L v = -v^3.
  Eigen::VectorXd v;
  /// The constant K of L w = K w^3 for the minimizer w with sum M w^4 = 1.
  double K = 0.0;
  double el_residual = 0.0;
  /// max |F^B of v^2 g + 1| from the discrete conformal law.
  double deviation = 0.0;
  /// Same with v interpolated trigonometrically and the continuum operator.
  double continuum_deviation = 0.0;
  double integral_condition = 0.0;
  double initial_functional = 0.0;
  double final_functional = 0.0;
  std::vector<double> functional_history;
  bool monotone = true;
  int descent_steps = 0;
  int newton_steps = 0;
};

NormalizationReport minimize_and_normalize(const DiscreteOperator& op, const SpectralOptions& opts = {});

/// (integral of F^B of u^2 g against its volume, integral of F^B u^2 + 6 |du|^2 against dV_g).
std::pair<double, double> conformal_integral_identity(const MetricField& g, const ScalarField& u, double t,
                                            const ChartGrid& grid);

/// Derivative of a periodic grid function along an axis by trigonometric interpolation.
std::vector<double> spectral_derivative(const std::vector<double>& f, const ChartGrid& grid, int axis);

/// Smallest nonzero eigenvalue of -Lap_h on a flat box of the grid's shape.
double flat_first_eigenvalue(const ChartGrid& grid);

}  // namespace bachgeom
