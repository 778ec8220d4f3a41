#pragma once

// Metric and scalar fields on a chart, their jets, and quadrature over grids.

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "bachgeom/chart.hpp"
#include "bachgeom/error.hpp"
#include "bachgeom/types.hpp"

namespace bachgeom {

enum class Provenance { kCatalogAnalytic, kDualNumber, kFiniteDifference };

const char* provenance_name(Provenance p);

/// Coordinate box on which a field is defined.  Periodic axes wrap.
struct ChartDomain {
  Point lo{};
  Point hi{};
  std::array<bool, kDim> periodic{};

  static ChartDomain whole_space();
  static ChartDomain periodic_box(const std::array<double, kDim>& sides);
  static ChartDomain open_box(const Point& lo, const Point& hi);

  /// Wrap periodic axes into [lo, hi); throws point-outside-chart otherwise.
  Point canonical(const Point& p) const;
  bool contains(const Point& p) const;
};

struct JetOptions {
  double pd_floor = 1e-10;
  double fd_tol = 1e-5;
};

/// Metric components and their partial derivatives through `order` at a point.
class MetricJet {
 public:
  MetricJet(const Point& p, const MetricTaylor& g, int order);

  const Point& point() const { return point_; }
  int order() const { return order_; }
  const MetricTaylor& taylor() const { return g_; }

  double g(int i, int j) const { return g_[i][j].value(); }
  /// d_a g_ij
  double dg(int i, int j, int a) const;
  double d2g(int i, int j, int a, int b) const;
  double d3g(int i, int j, int a, int b, int c) const;
  double d4g(int i, int j, int a, int b, int c, int d) const;
  double partial(int i, int j, const MultiIndex& alpha) const;
  Mat4 values() const { return jet_values(g_); }

 private:
  Point point_;
  MetricTaylor g_;
  int order_;
};

class MetricField {
 public:
  using TaylorEval = std::function<MetricTaylor(const Point&)>;
  using ValueEval = std::function<Mat4(const Point&)>;

  MetricField() = default;

  /// Field with exact jets obtained by Taylor arithmetic on a closed form.
  static MetricField analytic(std::string label, ChartDomain domain, TaylorEval taylor, ValueEval value,
                              Provenance provenance = Provenance::kCatalogAnalytic);
  /// Field known only through point values; jets come from central stencils.
  static MetricField finite_difference(std::string label, ChartDomain domain, ValueEval value,
                                       double step = 0.05);

  const std::string& label() const { return label_; }
  Provenance provenance() const { return provenance_; }
  const ChartDomain& domain() const { return domain_; }
  double fd_step() const { return fd_step_; }
  bool valid() const { return static_cast<bool>(value_); }

  /// Order-4 Taylor expansion of g at p (stencil-based for finite-difference fields).
  MetricTaylor taylor(const Point& p, const JetOptions& opts = {}) const;
  Mat4 value(const Point& p) const;

 private:
  std::string label_;
  Provenance provenance_ = Provenance::kCatalogAnalytic;
  ChartDomain domain_ = ChartDomain::whole_space();
  TaylorEval taylor_;
  ValueEval value_;
  double fd_step_ = 0.0;
};

/// Scalar function with order-5 jets.
class ScalarField {
 public:
  using TaylorEval = std::function<ScalarTaylor(const Point&)>;
  using ValueEval = std::function<double(const Point&)>;

  ScalarField() = default;
  ScalarField(std::string label, TaylorEval taylor, ValueEval value = {});

  const std::string& label() const { return label_; }
  ScalarTaylor taylor(const Point& p) const { return taylor_(p); }
  double value(const Point& p) const { return value_ ? value_(p) : taylor_(p).value(); }
  bool valid() const { return static_cast<bool>(taylor_); }

  static ScalarField constant(double c);

 private:
  std::string label_;
  TaylorEval taylor_;
  ValueEval value_;
};

/// Builds a metric field from a generic closed form `f(std::array<T,4>) -> JetMat-like` for
/// T in {double, Taylor<4>}.
template <class F>
MetricField make_analytic_metric(std::string label, ChartDomain domain, F f,
                                 Provenance provenance = Provenance::kCatalogAnalytic) {
  auto taylor = [f](const Point& p) -> MetricTaylor {
    const auto x = coordinate_jets<kMetricOrder>(p);
    const auto m = f(x);
    MetricTaylor r;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) r[i][j] = m[i][j];
    return r;
  };
  auto value = [f](const Point& p) -> Mat4 {
    const auto m = f(p);
    Mat4 r;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) r[i][j] = m[i][j];
    return r;
  };
  return MetricField::analytic(std::move(label), domain, taylor, value, provenance);
}

template <class F>
ScalarField make_scalar_field(std::string label, F f) {
  auto taylor = [f](const Point& p) -> ScalarTaylor { return f(coordinate_jets<kScalarOrder>(p)); };
  auto value = [f](const Point& p) -> double { return f(p); };
  return ScalarField(std::move(label), taylor, value);
}

/// Jet of the metric through `order` (<= 4) at p, validated.
MetricJet jet_of_metric(const MetricField& field, const ChartPoint& p, int order,
                        const JetOptions& opts = {});

/// Central finite-difference jet of a point-valued metric with step h (order-6 stencils).
MetricTaylor finite_difference_jet(const MetricField::ValueEval& value, const Point& p, double h);

/// Sum over nodes of f * sqrt(det g) * weight, compensated, in node order.
double integrate(const ScalarField& f, const ChartGrid& grid, const MetricField& metric);
double integrate(const std::function<double(const Point&)>& f, const ChartGrid& grid,
                 const MetricField& metric);
/// Same reduction for integrand values already multiplied by nothing (per node).
double integrate_node_values(const std::vector<double>& values, const ChartGrid& grid,
                             const MetricField& metric);
/// Reduction of values that already include the volume density: sum value * volume_weight.
double sum_with_weights(const std::vector<double>& values, const ChartGrid& grid);

double det4(const Mat4& m);
Mat4 inverse4(const Mat4& m);
/// Smallest eigenvalue of a symmetric 4x4 matrix.
double min_eigenvalue(const Mat4& m);

}  // namespace bachgeom
