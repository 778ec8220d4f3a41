#include "bachgeom/curvature.hpp"

#include <cmath>
#include <vector>

namespace bachgeom {

namespace {

constexpr std::array<std::array<int, 2>, 6> kPairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

template <class T>
using Rank4 = std::array<std::array<std::array<std::array<T, kDim>, kDim>, kDim>, kDim>;

// Fill all 256 entries of an algebraic curvature tensor from a function of (i,j,k,l) evaluated
// on the 21 pair-ordered representatives.
template <class T, class F>
void fill_curvature(Rank4<T>& r, F&& component) {
  for (auto& a : r)
    for (auto& b : a)
      for (auto& c : b)
        for (auto& d : c) d = T(0.0);
  for (int p = 0; p < 6; ++p)
    for (int q = p; q < 6; ++q) {
      const int i = kPairs[p][0], j = kPairs[p][1], k = kPairs[q][0], l = kPairs[q][1];
      const T v = component(i, j, k, l);
      r[i][j][k][l] = v;
      r[j][i][k][l] = -v;
      r[i][j][l][k] = -v;
      r[j][i][l][k] = v;
      r[k][l][i][j] = v;
      r[l][k][i][j] = -v;
      r[k][l][j][i] = -v;
      r[l][k][j][i] = v;
    }
}

MultiIndex unit2(int a, int b) {
  MultiIndex m{};
  ++m[a];
  ++m[b];
  return m;
}

}  // namespace

const char* bach_form_name(BachForm f) { return f == BachForm::kWeyl ? "weyl-form" : "ricci-form"; }

template <int N>
JetMat<N> invert_jet(const JetMat<N>& input) {
  JetMat<N> a = input;
  JetMat<N> inv;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) inv[i][j] = Taylor<N>(i == j ? 1.0 : 0.0);
  for (int c = 0; c < kDim; ++c) {
    if (a[c][c].value() == 0.0) fail(ErrorCode::kPdViolation, "singular metric jet");
    const Taylor<N> piv = reciprocal(a[c][c]);
    for (int j = c; j < kDim; ++j) a[c][j] = a[c][j] * piv;
    for (int j = 0; j < kDim; ++j) inv[c][j] = inv[c][j] * piv;
    for (int r = 0; r < kDim; ++r) {
      if (r == c) continue;
      const Taylor<N> f = a[r][c];
      for (int j = c; j < kDim; ++j) a[r][j] -= f * a[c][j];
      for (int j = 0; j < kDim; ++j) inv[r][j] -= f * inv[c][j];
    }
  }
  return inv;
}

template JetMat<0> invert_jet<0>(const JetMat<0>&);
template JetMat<1> invert_jet<1>(const JetMat<1>&);
template JetMat<2> invert_jet<2>(const JetMat<2>&);
template JetMat<3> invert_jet<3>(const JetMat<3>&);
template JetMat<4> invert_jet<4>(const JetMat<4>&);
template JetMat<5> invert_jet<5>(const JetMat<5>&);

GeometryJets::GeometryJets(const MetricTaylor& metric) : g(metric) {
  ginv = invert_jet(truncate<3>(metric));
  std::array<JetMat<3>, kDim> dg;
  for (int c = 0; c < kDim; ++c)
    for (int i = 0; i < kDim; ++i)
      for (int j = i; j < kDim; ++j) dg[c][i][j] = dg[c][j][i] = metric[i][j].diff(c);
  for (int a = 0; a < kDim; ++a)
    for (int i = 0; i < kDim; ++i)
      for (int j = i; j < kDim; ++j)
        gamma1[a][i][j] = gamma1[a][j][i] = 0.5 * (dg[i][a][j] + dg[j][a][i] - dg[a][i][j]);
  for (int k = 0; k < kDim; ++k)
    for (int i = 0; i < kDim; ++i)
      for (int j = i; j < kDim; ++j) {
        Taylor<3> s;
        for (int a = 0; a < kDim; ++a) s.add_product(ginv[k][a], gamma1[a][i][j]);
        gamma[k][i][j] = gamma[k][j][i] = s;
      }

  std::array<JetMat<2>, kDim> g1, gm;
  for (int a = 0; a < kDim; ++a)
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) {
        g1[a][i][j] = gamma1[a][i][j].truncate<2>();
        gm[a][i][j] = gamma[a][i][j].truncate<2>();
      }
  auto d2 = [&](int i, int j, int a, int b) { return dg[a][i][j].diff(b); };
  Rank4<Taylor<2>> r;
  fill_curvature(r, [&](int i, int j, int k, int l) {
    Taylor<2> v = 0.5 * (d2(i, l, j, k) + d2(j, k, i, l) - d2(i, k, j, l) - d2(j, l, i, k));
    for (int a = 0; a < kDim; ++a) {
      v.add_product(g1[a][j][k], gm[a][i][l]);
      v.add_product(-1.0 * g1[a][j][l], gm[a][i][k]);
    }
    return v;
  });
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int k = 0; k < kDim; ++k)
        for (int l = 0; l < kDim; ++l) riemann[i][j][k][l] = r[i][j][k][l];

  JetMat<2> gi2 = truncate<2>(ginv);
  scalar = Taylor<2>();
  for (int i = 0; i < kDim; ++i)
    for (int j = i; j < kDim; ++j) {
      Taylor<2> s;
      for (int k = 0; k < kDim; ++k)
        for (int l = 0; l < kDim; ++l) s.add_product(gi2[k][l], riemann[k][i][l][j]);
      ricci[i][j] = ricci[j][i] = s;
    }
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) scalar.add_product(gi2[i][j], ricci[i][j]);
}

namespace {

Mat4 values(const JetMat<3>& m) { return jet_values(m); }

// Ricci-form Bach assembled from the jets.
Mat4 bach_ricci_from(const GeometryJets& G) {
  const Mat4 gi = values(G.ginv);
  const Mat4 g0 = jet_values(G.g);
  Tensor3 gam{};
  std::array<JetMat<1>, kDim> gam1;
  for (int k = 0; k < kDim; ++k)
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) {
        gam[k][i][j] = G.gamma[k][i][j].value();
        gam1[k][i][j] = G.gamma[k][i][j].truncate<1>();
      }
  JetMat<1> ric1 = truncate<1>(G.ricci);
  // nabla_a R_ij through first order
  std::array<JetMat<1>, kDim> dr;
  for (int a = 0; a < kDim; ++a)
    for (int i = 0; i < kDim; ++i)
      for (int j = i; j < kDim; ++j) {
        Taylor<1> v = G.ricci[i][j].diff(a);
        for (int c = 0; c < kDim; ++c) {
          v -= gam1[c][a][i] * ric1[c][j];
          v -= gam1[c][a][j] * ric1[i][c];
        }
        dr[a][i][j] = dr[a][j][i] = v;
      }
  Tensor3 dr0{};
  for (int a = 0; a < kDim; ++a)
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) dr0[a][i][j] = dr[a][i][j].value();

  Mat4 lap_ric{};
  for (int i = 0; i < kDim; ++i)
    for (int j = i; j < kDim; ++j) {
      double s = 0.0;
      for (int a = 0; a < kDim; ++a)
        for (int b = 0; b < kDim; ++b) {
          if (gi[a][b] == 0.0) continue;
          double v = dr[a][i][j].diff(b).value();
          for (int c = 0; c < kDim; ++c)
            v -= gam[c][b][a] * dr0[c][i][j] + gam[c][b][i] * dr0[a][c][j] + gam[c][b][j] * dr0[a][i][c];
          s += gi[a][b] * v;
        }
      lap_ric[i][j] = lap_ric[j][i] = s;
    }

  Vec4 ds{};
  for (int k = 0; k < kDim; ++k) ds[k] = G.scalar.diff(k).value();
  Mat4 hess{};
  double lap_s = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      double v = G.scalar.derivative(unit2(i, j));
      for (int k = 0; k < kDim; ++k) v -= gam[k][i][j] * ds[k];
      hess[i][j] = v;
      lap_s += gi[i][j] * v;
    }

  const Mat4 ric = jet_values(G.ricci);
  const double S = G.scalar.value();
  Mat4 up{};
  for (int k = 0; k < kDim; ++k)
    for (int l = 0; l < kDim; ++l) {
      double s = 0.0;
      for (int a = 0; a < kDim; ++a)
        for (int b = 0; b < kDim; ++b) s += gi[k][a] * gi[l][b] * ric[a][b];
      up[k][l] = s;
    }
  double ric_sq = 0.0;
  for (int k = 0; k < kDim; ++k)
    for (int l = 0; l < kDim; ++l) ric_sq += up[k][l] * ric[k][l];

  Mat4 b{};
  for (int i = 0; i < kDim; ++i)
    for (int j = i; j < kDim; ++j) {
      double rr = 0.0;
      for (int k = 0; k < kDim; ++k)
        for (int l = 0; l < kDim; ++l) rr += up[k][l] * G.riemann[i][k][j][l].value();
      const double v = lap_ric[i][j] - hess[i][j] / 3.0 + 2.0 * rr - 2.0 / 3.0 * S * ric[i][j] -
                       lap_s / 6.0 * g0[i][j] - 0.5 * (ric_sq - S * S / 3.0) * g0[i][j];
      b[i][j] = b[j][i] = 0.5 * v;
    }
  return b;
}

Mat4 bach_weyl_from(const GeometryJets& G) {
  const Mat4 gi = values(G.ginv);
  JetMat<2> g2 = truncate<2>(G.g);
  Rank4<Taylor<2>> w;
  const Taylor<2> s12 = G.scalar * (1.0 / 12.0);
  fill_curvature(w, [&](int i, int j, int k, int l) {
    const auto& R = G.ricci;
    Taylor<2> v = G.riemann[i][j][k][l];
    Taylor<2> kn = R[i][k] * g2[j][l];
    kn.add_product(R[j][l], g2[i][k]);
    kn.add_product(-1.0 * R[i][l], g2[j][k]);
    kn.add_product(-1.0 * R[j][k], g2[i][l]);
    v -= 0.5 * kn;
    Taylor<2> gg = g2[i][k] * g2[j][l];
    gg.add_product(-1.0 * g2[i][l], g2[j][k]);
    v += 2.0 * (s12 * gg);
    return v;
  });

  std::array<JetMat<1>, kDim> gam1;
  Tensor3 gam{};
  for (int k = 0; k < kDim; ++k)
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) {
        gam1[k][i][j] = G.gamma[k][i][j].truncate<1>();
        gam[k][i][j] = G.gamma[k][i][j].value();
      }
  Rank4<Taylor<1>> w1;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int k = 0; k < kDim; ++k)
        for (int l = 0; l < kDim; ++l) w1[i][j][k][l] = w[i][j][k][l].truncate<1>();

  // v[a] = nabla_a W through first order
  std::vector<Rank4<Taylor<1>>> v(kDim);
  for (int a = 0; a < kDim; ++a)
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j)
        for (int k = 0; k < kDim; ++k)
          for (int l = 0; l < kDim; ++l) {
            Taylor<1> t = w[i][j][k][l].diff(a);
            for (int c = 0; c < kDim; ++c) {
              t -= gam1[c][a][i] * w1[c][j][k][l];
              t -= gam1[c][a][j] * w1[i][c][k][l];
              t -= gam1[c][a][k] * w1[i][j][c][l];
              t -= gam1[c][a][l] * w1[i][j][k][c];
            }
            v[a][i][j][k][l] = t;
          }
  auto v0 = [&](int a, int i, int j, int k, int l) { return v[a][i][j][k][l].value(); };

  Mat4 ric{};
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) ric[i][j] = G.ricci[i][j].value();
  Mat4 up{};
  for (int k = 0; k < kDim; ++k)
    for (int l = 0; l < kDim; ++l)
      for (int a = 0; a < kDim; ++a)
        for (int b = 0; b < kDim; ++b) up[k][l] += gi[k][a] * gi[l][b] * ric[a][b];

  // nabla^k nabla^l W_ikjl, inner derivative on l
  Mat4 b{};
  for (int i = 0; i < kDim; ++i)
    for (int j = i; j < kDim; ++j) {
      double s = 0.0;
      for (int k = 0; k < kDim; ++k)
        for (int l = 0; l < kDim; ++l)
          for (int bb = 0; bb < kDim; ++bb) {
            if (gi[k][bb] == 0.0) continue;
            for (int a = 0; a < kDim; ++a) {
              if (gi[l][a] == 0.0) continue;
              double d = v[a][i][k][j][l].diff(bb).value();
              for (int c = 0; c < kDim; ++c)
                d -= gam[c][bb][a] * v0(c, i, k, j, l) + gam[c][bb][i] * v0(a, c, k, j, l) +
                     gam[c][bb][k] * v0(a, i, c, j, l) + gam[c][bb][j] * v0(a, i, k, c, l) +
                     gam[c][bb][l] * v0(a, i, k, j, c);
              s += gi[k][bb] * gi[l][a] * d;
            }
          }
      double rw = 0.0;
      for (int k = 0; k < kDim; ++k)
        for (int l = 0; l < kDim; ++l) rw += up[k][l] * w[i][k][j][l].value();
      b[i][j] = b[j][i] = s + 0.5 * rw;
    }
  return b;
}

void require_order(const MetricJet& jet, int order, const char* what) {
  if (jet.order() < order)
    fail(ErrorCode::kInsufficientJetOrder, std::string(what) + " needs a jet of order " +
                                               std::to_string(order) + ", got " +
                                               std::to_string(jet.order()));
}

}  // namespace

Tensor4 kulkarni_nomizu(const Mat4& h, const Mat4& k) {
  Tensor4 r{};
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int a = 0; a < kDim; ++a)
        for (int b = 0; b < kDim; ++b)
          r[i][j][a][b] = h[i][a] * k[j][b] + h[j][b] * k[i][a] - h[i][b] * k[j][a] - h[j][a] * k[i][b];
  return r;
}

ChristoffelData christoffel(const MetricJet& jet) {
  require_order(jet, 2, "christoffel");
  const GeometryJets G(jet.taylor());
  ChristoffelData out;
  for (int k = 0; k < kDim; ++k)
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) {
        out.gamma[k][i][j] = G.gamma[k][i][j].value();
        for (int a = 0; a < kDim; ++a) out.dgamma[a][k][i][j] = G.gamma[k][i][j].diff(a).value();
      }
  return out;
}

CurvatureBundle curvature_bundle(const MetricJet& jet) {
  require_order(jet, 2, "curvature_bundle");
  const GeometryJets G(jet.taylor());
  CurvatureBundle out;
  out.point = jet.point();
  out.g = jet.values();
  out.ginv = values(G.ginv);
  for (int k = 0; k < kDim; ++k)
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) {
        out.gamma[k][i][j] = G.gamma[k][i][j].value();
        for (int a = 0; a < kDim; ++a) out.dgamma[a][k][i][j] = G.gamma[k][i][j].diff(a).value();
      }
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int k = 0; k < kDim; ++k)
        for (int l = 0; l < kDim; ++l) out.riemann[i][j][k][l] = G.riemann[i][j][k][l].value();
  out.ricci = jet_values(G.ricci);
  out.scalar = G.scalar.value();
  const Tensor4 rg = kulkarni_nomizu(out.ricci, out.g);
  const Tensor4 gg = kulkarni_nomizu(out.g, out.g);
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int k = 0; k < kDim; ++k)
        for (int l = 0; l < kDim; ++l)
          out.weyl[i][j][k][l] =
              out.riemann[i][j][k][l] - 0.5 * rg[i][j][k][l] + out.scalar / 12.0 * gg[i][j][k][l];
  return out;
}

Mat4 bach_ricci_form(const MetricTaylor& g) { return bach_ricci_from(GeometryJets(g)); }
Mat4 bach_weyl_form(const MetricTaylor& g) { return bach_weyl_from(GeometryJets(g)); }

BachValue bach_ricci_form(const MetricJet& jet) {
  require_order(jet, 4, "bach_ricci_form");
  return {bach_ricci_form(jet.taylor()), jet.point(), BachForm::kRicci};
}

BachValue bach_weyl_form(const MetricJet& jet) {
  require_order(jet, 4, "bach_weyl_form");
  return {bach_weyl_form(jet.taylor()), jet.point(), BachForm::kWeyl};
}

BachValue bach_ricci_form(const MetricField& field, const ChartPoint& p, const JetOptions& opts) {
  return bach_ricci_form(jet_of_metric(field, p, 4, opts));
}

BachValue bach_weyl_form(const MetricField& field, const ChartPoint& p, const JetOptions& opts) {
  return bach_weyl_form(jet_of_metric(field, p, 4, opts));
}

PointCurvature point_curvature(const MetricTaylor& g) {
  const GeometryJets G(g);
  PointCurvature out;
  out.g = jet_values(g);
  out.ginv = values(G.ginv);
  out.ricci = jet_values(G.ricci);
  out.scalar = G.scalar.value();
  out.bach = bach_ricci_from(G);
  out.bach_norm = tensor_norm(out.bach, out.ginv);
  return out;
}

std::vector<double> flatten(const Mat4& t) {
  std::vector<double> v;
  v.reserve(16);
  for (const auto& row : t)
    for (double x : row) v.push_back(x);
  return v;
}

std::vector<double> flatten(const Tensor4& t) {
  std::vector<double> v;
  v.reserve(256);
  for (const auto& a : t)
    for (const auto& b : a)
      for (const auto& c : b)
        for (double x : c) v.push_back(x);
  return v;
}

double tensor_norm(const std::vector<double>& t, int rank, const Mat4& ginv) {
  std::size_t expected = 1;
  for (int r = 0; r < rank; ++r) expected *= kDim;
  if (rank < 0 || t.size() != expected)
    fail(ErrorCode::kRankMismatch, "tensor has " + std::to_string(t.size()) + " components, rank " +
                                       std::to_string(rank) + " needs " + std::to_string(expected));
  // raise one slot at a time: up = ginv applied on every index
  std::vector<double> up = t;
  std::size_t stride = 1;
  for (int r = rank - 1; r >= 0; --r) {
    std::vector<double> next(up.size(), 0.0);
    for (std::size_t n = 0; n < up.size(); ++n) {
      const int idx = static_cast<int>((n / stride) % kDim);
      const std::size_t base = n - idx * stride;
      double s = 0.0;
      for (int c = 0; c < kDim; ++c) s += ginv[idx][c] * up[base + c * stride];
      next[n] = s;
    }
    up.swap(next);
    stride *= kDim;
  }
  double s = 0.0;
  for (std::size_t n = 0; n < t.size(); ++n) s += t[n] * up[n];
  return std::sqrt(std::max(0.0, s));
}

double tensor_norm(const Mat4& t, const Mat4& ginv) {
  double s = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      double u = 0.0;
      for (int p = 0; p < kDim; ++p)
        for (int q = 0; q < kDim; ++q) u += ginv[i][p] * ginv[j][q] * t[p][q];
      s += t[i][j] * u;
    }
  return std::sqrt(std::max(0.0, s));
}

double tensor_norm(const Tensor4& t, const Mat4& ginv) { return tensor_norm(flatten(t), 4, ginv); }

double tensor_norm(const std::vector<double>& components, int rank, const MetricJet& jet) {
  return tensor_norm(components, rank, inverse4(jet.values()));
}

}  // namespace bachgeom
