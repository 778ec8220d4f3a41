#pragma once

// Coordinate charts and their quadrature grids.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "bachgeom/types.hpp"

namespace bachgeom {

enum class Topology { kPeriodicBox, kPolarBall };

const char* topology_name(Topology t);

/// Location of a point in a chart.  Periodic charts wrap coordinates into [0, L).
struct ChartPoint {
  Point coords{};
};

struct ChartSpec {
  Topology topology = Topology::kPeriodicBox;
  /// Box side lengths; for a polar ball only extents[0] (the radius) is used.
  std::array<double, kDim> extents{};
  std::array<int, kDim> resolution{};
  /// Ball center in the ambient Cartesian chart (unused for boxes).
  Point center{};
  /// Radial Gauss-Legendre panels: half of them split (0, r/2) evenly, the rest
  /// halve in width toward the boundary sphere.
  /// resolution[0] must be a multiple of this.
  int radial_panels = 1;
};

/// A discretized chart with positive quadrature weights.
///
/// Box nodes sit on the uniform lattice x = m L / n.  Ball nodes are described
/// by polar coordinates (rho, s, xi1, xi2) where s = sin^2 of the Hopf angle,
/// in which the Euclidean volume element is rho^3 / 2 drho ds dxi1 dxi2.  The
/// radial direction uses composite Gauss-Legendre nodes on (0, r), s uses
/// Gauss-Legendre nodes on (0, 1) and the two Hopf circles are uniform, so neither the center
/// nor the boundary sphere carries a node.
class ChartGrid {
 public:
  Topology topology() const { return topology_; }
  const std::array<double, kDim>& extents() const { return extents_; }
  const std::array<int, kDim>& resolution() const { return resolution_; }
  const Point& center() const { return center_; }
  std::size_t size() const { return size_; }
  double radius() const { return extents_[0]; }

  /// Node location in the ambient Cartesian chart.
  Point node(std::size_t n) const;
  /// Polar coordinates (rho, s, xi1, xi2) of a ball node.
  Point polar(std::size_t n) const;
  /// Quadrature weight in the grid's own coordinates.
  double weight(std::size_t n) const;
  /// Coordinate Jacobian of the grid coordinates (rho^3 for balls, 1 for boxes).
  double jacobian(std::size_t n) const;
  /// weight * jacobian: the Euclidean volume carried by node n.
  double volume_weight(std::size_t n) const { return weight(n) * jacobian(n); }

  std::array<int, kDim> multi_index(std::size_t n) const;
  std::size_t linear_index(const std::array<int, kDim>& m) const;
  /// Lattice spacing of a periodic box along axis a.
  double spacing(int a) const { return extents_[a] / resolution_[a]; }

 private:
  friend ChartGrid make_chart(const ChartSpec& spec);

  Topology topology_ = Topology::kPeriodicBox;
  std::array<double, kDim> extents_{};
  std::array<int, kDim> resolution_{};
  Point center_{};
  std::size_t size_ = 0;
  // per-axis node coordinates and weights (grid coordinates)
  std::array<std::vector<double>, kDim> axis_nodes_;
  std::array<std::vector<double>, kDim> axis_weights_;
};

ChartGrid make_chart(const ChartSpec& spec);

/// Gauss-Legendre nodes and weights on (a, b).
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes, std::vector<double>& weights);

/// Neumaier-compensated accumulator; summation order is the caller's.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace bachgeom
