#pragma once

// Desk-scale version of the five-step construction: bump profile, psi on
// geodesic balls, the double deformation g'' = psi g + d(k psi) (x) d(k psi),
// the functional Phi and its expansion, k selection and the final normalization.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bachgeom/aubin.hpp"
#include "bachgeom/spectral.hpp"

namespace bachgeom {

/// y(x) = delta + (1 - delta) I(x^2) for |x| < 1 and 1 otherwise, where I is the
/// regularized incomplete beta function I_s(7, 5).  I is a polynomial in s whose
/// derivatives through order 4 vanish at s = 1, so y is C^4 across |x| = 1.
class BumpProfile {
 public:
  explicit BumpProfile(double delta);

  double delta() const { return delta_; }
  double value(double x) const { return derivative(x, 0); }
  /// d^m y / dx^m, m <= 6.
  double derivative(double x, int m) const;
  /// d^m Y / ds^m / m! for y(x) = Y(x^2), m = 0..N; zero beyond s >= 1 except Y = 1.
  template <int N>
  std::array<double, N + 1> s_coefficients(double s) const {
    std::array<double, N + 1> d{};
    for (int m = 0; m <= N; ++m) d[m] = s_derivative(s, m) / factorial(m);
    return d;
  }
  double s_derivative(double s, int m) const;

  static double factorial(int m);

 private:
  double delta_;
};

/// Largest delta for which y' >= 1 on [(1/4)^(1/3), (3/4)^(1/3)].
double max_feasible_delta();

/// Throws infeasible-delta (with the maximal feasible value in the message) when delta is too large.
BumpProfile bump_profile(double delta);

struct ProfileCheck {
  std::string name;
  bool pass = false;
  /// The extreme sampled value of the quantity the check bounds.
  double worst = 0.0;
};

struct ProfileReport {
  std::vector<ProfileCheck> checks;
  int samples = 0;
  bool all_pass() const;
};

/// Samples the six listed properties.  The second-derivative condition is read as
/// sup (1 - x)|y''| / y' <= ratio_bound on a sequence x_m -> 1.
ProfileReport check_profile(const BumpProfile& y, int samples = 10000, double ratio_bound = 5.0);

struct Ball {
  Point center{};
  double radius = 1.0;
};

/// psi = y(rho_j / r) on the ball j, psi = 1 off the balls.  rho is the coordinate
/// distance to the center, measured to the nearest periodic image.
ScalarField psi_field(const BumpProfile& y, const std::vector<Ball>& balls, const ChartDomain& domain);

/// eta = 2 sqrt(psi)
ScalarField eta_field(const ScalarField& psi);

/// g'' = psi g + k^2 d psi (x) d psi.
MetricField double_deformation(const MetricField& g, const ScalarField& psi, double k);
/// psi (g + d(2k sqrt psi) (x) d(2k sqrt psi)) computed independently.
MetricField double_deformation_factored(const MetricField& g, const ScalarField& psi, double k);
/// Max jet-coefficient mismatch between the two routes over the points, relative to 1 + max |coefficient|.
double double_deformation_mismatch(const MetricField& g, const ScalarField& psi, double k,
                                   const std::vector<Point>& points);
/// g~'' = (1 + k^2 |d psi|^2_g / psi)^(-1/2) g''.
MetricField normalized_double_deformation(const MetricField& g, const ScalarField& psi, double k);

struct NodeSample {
  Point x{};
  double rho = 0.0;
  double psi = 1.0;
  double bach_bar = 0.0;
  double scalar_bar = 0.0;
  double scalar_bach = 0.0;
};

struct PhiValues {
  /// Integral of F^B of g~'' against its own volume form.
  double direct = 0.0;
  /// The six-integral expansion over dV_g.
  double formula = 0.0;
  /// The same expansion with the coefficients exactly as printed in the source derivation.
  double literal = 0.0;
  /// Integral of F^B_g dV_g over the same nodes.
  double base = 0.0;
  double min_bach_bar = 0.0;
  std::size_t nodes = 0;
  double oracle_residual() const { return std::abs(direct - formula) / (1.0 + std::abs(direct)); }
};

/// Integrates over the nodes of a grid (ball or box).  samples, if given, receives one entry per node.
PhiValues evaluate_phi(const MetricField& g, const ScalarField& psi, double k, double t, const ChartGrid& grid,
                       std::vector<NodeSample>* samples = nullptr);

/// Grid-minimum of |B| for gbar = g + d(2k sqrt psi) (x) d(2k sqrt psi) on each grid.
double min_bach_bar(const MetricField& g, const ScalarField& psi, double k, const std::vector<ChartGrid>& grids);

struct KSelection {
  double k = 0.0;
  std::vector<double> candidates;
  std::vector<double> min_bach;
};

KSelection select_k(const MetricField& g, const ScalarField& psi, const std::vector<double>& candidates,
                    const std::vector<ChartGrid>& grids, double bach_floor = 1e-8);

struct BoundSample {
  double k = 0.0;
  double q = 0.0;
  double rho_at_max = 0.0;
};

struct BoundTable {
  std::vector<BoundSample> rows;
  /// Q for the undeformed metric on the same nodes.
  double undeformed_q = 0.0;
  /// max_k Q(k) <= 2 Q(k_max) + undeformed_q
  bool bounded() const;
};

/// Q(k) = max over ball nodes of |B_gbar|^(1/2) / (1 + (r - rho)^(-1/2)).
BoundTable bound_sampler(const MetricField& g, const ScalarField& psi, const Ball& ball,
                         const std::vector<double>& ks, const ChartGrid& grid);

struct ConstructionParams {
  double t = 1.0;
  /// Number of available ball slots h.
  int balls = 16;
  double radius = 1.2;
  /// Larger nu gives deeper wells delta = delta_max / (1 + nu) and uses min(h, ceil(nu)) balls.
  double nu = 16.0;
  std::vector<double> k_candidates{1.0, 3.0, 10.0, 30.0};
  /// Explicit centers; defaults to the lattice L/4 + (L/2) m on a periodic box, the origin otherwise.
  std::vector<Point> centers;
  std::array<int, kDim> ball_resolution{192, 4, 6, 6};
  int radial_panels = 12;
  int box_resolution = 16;
  bool normalize = true;
  std::vector<double> bound_ks{1.0, 10.0, 100.0, 1000.0};
  SpectralOptions spectral;
};

struct BallReport {
  Ball ball;
  PhiValues phi;
};

struct ConstructionReport {
  double delta = 0.0;
  double k_chosen = 0.0;
  KSelection selection;
  std::vector<BallReport> balls;
  /// Integral of F^B_g over the whole box (periodic base only).
  double base_integral = 0.0;
  double phi_value = 0.0;
  double phi_formula = 0.0;
  double phi_literal = 0.0;
  /// Trapezoid value of Phi on the box grid, an independent quadrature of the same integral.
  double phi_box = 0.0;
  double phi_oracle_residual = 0.0;
  double min_bach_norm = 0.0;
  double factorization_mismatch = 0.0;
  BoundTable bounds;
  bool closed_base = false;
  std::optional<TrichotomyResult> trichotomy;
  std::optional<NormalizationReport> normalization;
  bool success = false;
  std::vector<NodeSample> samples;
};

/// Carries the report computed up to the failing check.
class ConstructionFailure : public Error {
 public:
  ConstructionFailure(ErrorCode code, const std::string& what, ConstructionReport report)
      : Error(code, what), report_(std::move(report)) {}
  const ConstructionReport& report() const { return report_; }

 private:
  ConstructionReport report_;
};

/// Builds the balls, psi, chooses k, evaluates Phi per ball and globally and normalizes.
/// Errors: phi-not-negative and bach-degenerate (as ConstructionFailure) and the spectral errors.
ConstructionReport run_construction(const MetricField& g, const ConstructionParams& params,
                                    bool keep_samples = false);

std::vector<Ball> default_balls(const MetricField& g, const ConstructionParams& params);

}  // namespace bachgeom
