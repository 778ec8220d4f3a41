#pragma once

// Pointwise curvature from metric jets.
//
// Conventions: gamma[k][i][j] = Gamma^k_ij; R_ijkl is lowered on all indices and
// satisfies R_ijij > 0 on round spheres; Ric_ij = g^kl R_kilj; S = g^ij Ric_ij.
// The Kulkarni-Nomizu product is (h o k)_ijkl = h_ik k_jl + h_jl k_ik - h_il k_jk - h_jk k_il.

#include <vector>

#include "bachgeom/fields.hpp"

namespace bachgeom {

enum class BachForm { kWeyl, kRicci };

const char* bach_form_name(BachForm f);

struct ChristoffelData {
  Tensor3 gamma{};
  /// dgamma[a][k][i][j] = d_a Gamma^k_ij
  std::array<Tensor3, kDim> dgamma{};
};

struct CurvatureBundle {
  Point point{};
  Mat4 g{};
  Mat4 ginv{};
  Tensor3 gamma{};
  std::array<Tensor3, kDim> dgamma{};
  Tensor4 riemann{};
  Mat4 ricci{};
  double scalar = 0.0;
  Tensor4 weyl{};
};

struct BachValue {
  Mat4 b{};
  Point point{};
  BachForm formula = BachForm::kRicci;
};

/// Everything the scalar-Bach machinery needs at one point.
struct PointCurvature {
  Mat4 g{};
  Mat4 ginv{};
  Mat4 ricci{};
  double scalar = 0.0;
  Mat4 bach{};
  double bach_norm = 0.0;
};

/// Taylor expansions of the geometric quantities derived from an order-4 metric jet.
/// Each quantity is exact through the order its type carries.
struct GeometryJets {
  JetMat<kMetricOrder> g;
  JetMat<3> ginv;
  std::array<JetMat<3>, kDim> gamma;   // gamma[k][i][j]
  std::array<JetMat<3>, kDim> gamma1;  // first kind: gamma1[a][i][j] = g_ab Gamma^b_ij
  std::array<std::array<JetMat<2>, kDim>, kDim> riemann;
  JetMat<2> ricci;
  Taylor<2> scalar;

  explicit GeometryJets(const MetricTaylor& metric);
};

/// Inverse of a matrix of jets (Gauss-Jordan without pivoting; positive definite input).
template <int N>
JetMat<N> invert_jet(const JetMat<N>& a);

ChristoffelData christoffel(const MetricJet& jet);
CurvatureBundle curvature_bundle(const MetricJet& jet);

Mat4 bach_ricci_form(const MetricTaylor& g);
Mat4 bach_weyl_form(const MetricTaylor& g);
BachValue bach_ricci_form(const MetricJet& jet);
BachValue bach_weyl_form(const MetricJet& jet);
BachValue bach_ricci_form(const MetricField& field, const ChartPoint& p, const JetOptions& opts = {});
BachValue bach_weyl_form(const MetricField& field, const ChartPoint& p, const JetOptions& opts = {});

/// Ricci, scalar and Ricci-form Bach of an order-4 jet.
PointCurvature point_curvature(const MetricTaylor& g);

/// Kulkarni-Nomizu product of two symmetric 2-tensors.
Tensor4 kulkarni_nomizu(const Mat4& h, const Mat4& k);

/// g-norm of a covariant tensor stored row-major with 4^rank components.
double tensor_norm(const std::vector<double>& components, int rank, const Mat4& ginv);
double tensor_norm(const Mat4& t, const Mat4& ginv);
double tensor_norm(const Tensor4& t, const Mat4& ginv);
double tensor_norm(const std::vector<double>& components, int rank, const MetricJet& jet);

std::vector<double> flatten(const Mat4& t);
std::vector<double> flatten(const Tensor4& t);

}  // namespace bachgeom
