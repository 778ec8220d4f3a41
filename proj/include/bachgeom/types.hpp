#pragma once

#include <array>

#include "bachgeom/taylor.hpp"

namespace bachgeom {

using Point = std::array<double, kDim>;
using Vec4 = std::array<double, kDim>;
using Mat4 = std::array<std::array<double, kDim>, kDim>;
/// Rank-3 array, e.g. gamma[k][i][j] = Gamma^k_ij.
using Tensor3 = std::array<Mat4, kDim>;
/// Rank-4 array, e.g. riemann[i][j][k][l] = R_ijkl.
using Tensor4 = std::array<std::array<Mat4, kDim>, kDim>;

template <int N>
using JetMat = std::array<std::array<Taylor<N>, kDim>, kDim>;

/// Jet order carried by every metric field (four derivatives feed the Bach tensor).
inline constexpr int kMetricOrder = 4;
/// Jet order carried by scalar fields: deformations g + df (x) df consume one extra derivative.
inline constexpr int kScalarOrder = 5;

using MetricTaylor = JetMat<kMetricOrder>;
using ScalarTaylor = Taylor<kScalarOrder>;

inline Mat4 zero_mat() { return Mat4{}; }

inline Mat4 identity_mat() {
  Mat4 m{};
  for (int i = 0; i < kDim; ++i) m[i][i] = 1.0;
  return m;
}

template <int N>
JetMat<N> values_to_jet(const Mat4& m) {
  JetMat<N> r;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) r[i][j] = Taylor<N>(m[i][j]);
  return r;
}

template <int M, int N>
JetMat<M> truncate(const JetMat<N>& a) {
  JetMat<M> r;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) r[i][j] = a[i][j].template truncate<M>();
  return r;
}

template <int N>
Mat4 jet_values(const JetMat<N>& a) {
  Mat4 r;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) r[i][j] = a[i][j].value();
  return r;
}

/// Coordinate functions x_i as jets around p.
template <int N>
std::array<Taylor<N>, kDim> coordinate_jets(const Point& p) {
  std::array<Taylor<N>, kDim> x;
  for (int i = 0; i < kDim; ++i) x[i] = Taylor<N>::variable(i, p[i]);
  return x;
}

}  // namespace bachgeom
