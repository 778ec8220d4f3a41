#pragma once

#include <numbers>

#include "bachgeom/chart.hpp"
#include "bachgeom/types.hpp"

namespace testing_helpers {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline bachgeom::ChartGrid box(int n, double side = kTwoPi) {
  bachgeom::ChartSpec cs;
  cs.extents = {side, side, side, side};
  cs.resolution = {n, n, n, n};
  return bachgeom::make_chart(cs);
}

inline bachgeom::ChartGrid ball(double r, std::array<int, 4> res, const bachgeom::Point& center = {}, int panels = 1) {
  bachgeom::ChartSpec cs;
  cs.topology = bachgeom::Topology::kPolarBall;
  cs.extents = {r, 1.0, 1.0, 1.0};
  cs.resolution = res;
  cs.center = center;
  cs.radial_panels = panels;
  return bachgeom::make_chart(cs);
}

inline double max_abs(const bachgeom::Mat4& m) {
  double r = 0.0;
  for (const auto& row : m)
    for (double v : row) r = std::max(r, std::abs(v));
  return r;
}

inline double max_diff(const bachgeom::Mat4& a, const bachgeom::Mat4& b) {
  double r = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r = std::max(r, std::abs(a[i][j] - b[i][j]));
  return r;
}

}  // namespace testing_helpers
