#include "bachgeom/chart.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bachgeom/error.hpp"

namespace bachgeom {

const char* topology_name(Topology t) {
  return t == Topology::kPeriodicBox ? "periodic-box" : "polar-ball";
}

void gauss_legendre(int n, double a, double b, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = mid - half * x;
    nodes[n - 1 - i] = mid + half * x;
    weights[i] = weights[n - 1 - i] = half * w;
  }
}

ChartGrid make_chart(const ChartSpec& spec) {
  ChartGrid grid;
  grid.topology_ = spec.topology;
  grid.resolution_ = spec.resolution;
  grid.extents_ = spec.extents;
  grid.center_ = spec.center;
  const int used = spec.topology == Topology::kPeriodicBox ? kDim : 1;
  for (int a = 0; a < used; ++a)
    if (!(spec.extents[a] > 0.0) || !std::isfinite(spec.extents[a]))
      fail(ErrorCode::kInvalidSpec, "chart extent must be positive, got " + std::to_string(spec.extents[a]));
  for (int a = 0; a < kDim; ++a)
    if (spec.resolution[a] < 4)
      fail(ErrorCode::kInvalidSpec,
           "chart resolution must be >= 4 per axis, got " + std::to_string(spec.resolution[a]));

  grid.size_ = 1;
  for (int a = 0; a < kDim; ++a) grid.size_ *= static_cast<std::size_t>(spec.resolution[a]);

  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (spec.topology == Topology::kPeriodicBox) {
    for (int a = 0; a < kDim; ++a) {
      const int n = spec.resolution[a];
      const double h = spec.extents[a] / n;
      grid.axis_nodes_[a].resize(n);
      grid.axis_weights_[a].assign(n, h);
      for (int m = 0; m < n; ++m) grid.axis_nodes_[a][m] = m * h;
    }
  } else {
    grid.extents_ = {spec.extents[0], 1.0, two_pi, two_pi};
    const int panels = spec.radial_panels;
    if (panels < 1 || spec.resolution[0] % panels != 0)
      throw Error(ErrorCode::kInvalidArgument, "radial resolution must be a positive multiple of the panel count");
    const int per = spec.resolution[0] / panels;
    const int uniform = panels / 2;
    const double r = spec.extents[0];
    double a = 0.0;
    for (int p = 0; p < panels; ++p) {
      double b = r;
      if (p < uniform)
        b = 0.5 * r * (p + 1) / uniform;
      else if (p + 1 < panels)
        b = r * (1.0 - std::ldexp(1.0, -(p + 2 - uniform)));
      std::vector<double> x, w;
      gauss_legendre(per, a, b, x, w);
      grid.axis_nodes_[0].insert(grid.axis_nodes_[0].end(), x.begin(), x.end());
      grid.axis_weights_[0].insert(grid.axis_weights_[0].end(), w.begin(), w.end());
      a = b;
    }
    const int ns = spec.resolution[1];
    // the 1/2 of the Hopf volume element lives in the s weights
    gauss_legendre(ns, 0.0, 1.0, grid.axis_nodes_[1], grid.axis_weights_[1]);
    for (double& w : grid.axis_weights_[1]) w *= 0.5;
    for (int a = 2; a < kDim; ++a) {
      const int n = spec.resolution[a];
      grid.axis_nodes_[a].resize(n);
      grid.axis_weights_[a].assign(n, two_pi / n);
      for (int m = 0; m < n; ++m) grid.axis_nodes_[a][m] = two_pi * m / n;
    }
  }
  return grid;
}

std::array<int, kDim> ChartGrid::multi_index(std::size_t n) const {
  std::array<int, kDim> m{};
  for (int a = kDim - 1; a >= 0; --a) {
    m[a] = static_cast<int>(n % resolution_[a]);
    n /= resolution_[a];
  }
  return m;
}

std::size_t ChartGrid::linear_index(const std::array<int, kDim>& m) const {
  std::size_t n = 0;
  for (int a = 0; a < kDim; ++a) {
    int v = m[a] % resolution_[a];
    if (v < 0) v += resolution_[a];
    n = n * resolution_[a] + static_cast<std::size_t>(v);
  }
  return n;
}

Point ChartGrid::polar(std::size_t n) const {
  const auto m = multi_index(n);
  Point p;
  for (int a = 0; a < kDim; ++a) p[a] = axis_nodes_[a][m[a]];
  return p;
}

Point ChartGrid::node(std::size_t n) const {
  const Point q = polar(n);
  if (topology_ == Topology::kPeriodicBox) return q;
  const double rho = q[0];
  const double sin_eta = std::sqrt(q[1]), cos_eta = std::sqrt(1.0 - q[1]);
  return {center_[0] + rho * sin_eta * std::cos(q[2]), center_[1] + rho * sin_eta * std::sin(q[2]),
          center_[2] + rho * cos_eta * std::cos(q[3]), center_[3] + rho * cos_eta * std::sin(q[3])};
}

double ChartGrid::weight(std::size_t n) const {
  const auto m = multi_index(n);
  double w = 1.0;
  for (int a = 0; a < kDim; ++a) w *= axis_weights_[a][m[a]];
  return w;
}

double ChartGrid::jacobian(std::size_t n) const {
  if (topology_ == Topology::kPeriodicBox) return 1.0;
  const double rho = axis_nodes_[0][multi_index(n)[0]];
  return rho * rho * rho;
}

}  // namespace bachgeom
