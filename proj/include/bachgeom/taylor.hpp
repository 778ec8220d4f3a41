#pragma once

// Truncated multivariate Taylor polynomials in four variables.
//
// A Taylor<N> holds the coefficients of the Taylor expansion of a smooth
// function around a base point, truncated at total degree N.  Arithmetic on
// these objects is exact forward-mode differentiation through order N, which
// is how every metric jet in the library is produced.
//
// Coefficients are stored in graded lexicographic order, so the coefficient
// array of a Taylor<M> is a prefix of the array of a Taylor<N> for M < N.
// Truncation is therefore a plain prefix copy.

#include <array>
#include <vector>
#include <cmath>
#include <cstdint>

namespace bachgeom {

inline constexpr int kDim = 4;
inline constexpr int kMaxOrder = 6;

constexpr int taylor_size(int order) {
  // binomial(order + 4, 4)
  return (order + 1) * (order + 2) * (order + 3) * (order + 4) / 24;
}

namespace detail {

struct MonomialTable {
  static constexpr int kCount = taylor_size(kMaxOrder);
  static constexpr int kBase = kMaxOrder + 1;
  std::array<std::array<std::uint8_t, kDim>, kCount> exps{};
  std::array<std::uint8_t, kCount> degree{};
  std::array<std::int16_t, kBase * kBase * kBase * kBase> lookup{};
  // shift[i][m] = index of (m + e_i), or -1 if that exceeds kMaxOrder.
  std::array<std::array<std::int16_t, kCount>, kDim> shift{};
  // factorial of the multi-index, alpha!
  std::array<double, kCount> factorial{};

  constexpr int key(int a, int b, int c, int d) const {
    return ((a * kBase + b) * kBase + c) * kBase + d;
  }

  constexpr MonomialTable() {
    for (auto& l : lookup) l = -1;
    int n = 0;
    for (int deg = 0; deg <= kMaxOrder; ++deg) {
      // lexicographically descending within a degree
      for (int a = deg; a >= 0; --a)
        for (int b = deg - a; b >= 0; --b)
          for (int c = deg - a - b; c >= 0; --c) {
            const int d = deg - a - b - c;
            exps[n] = {static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b),
                       static_cast<std::uint8_t>(c), static_cast<std::uint8_t>(d)};
            degree[n] = static_cast<std::uint8_t>(deg);
            lookup[key(a, b, c, d)] = static_cast<std::int16_t>(n);
            double f = 1.0;
            for (int e : {a, b, c, d})
              for (int k = 2; k <= e; ++k) f *= k;
            factorial[n] = f;
            ++n;
          }
    }
    for (int i = 0; i < kDim; ++i)
      for (int m = 0; m < kCount; ++m) {
        if (degree[m] >= kMaxOrder) {
          shift[i][m] = -1;
          continue;
        }
        std::array<int, kDim> e{exps[m][0], exps[m][1], exps[m][2], exps[m][3]};
        ++e[i];
        shift[i][m] = lookup[key(e[0], e[1], e[2], e[3])];
      }
  }

  constexpr int index(int a, int b, int c, int d) const { return lookup[key(a, b, c, d)]; }
};

inline constexpr MonomialTable kMonomials{};

template <int N>
struct ProductTable {
  static constexpr int kSize = taylor_size(N);
  static constexpr int count() {
    int n = 0;
    for (int a = 0; a < kSize; ++a)
      for (int b = 0; b < kSize; ++b)
        if (kMonomials.degree[a] + kMonomials.degree[b] <= N) ++n;
    return n;
  }
  static constexpr int kCount = count();
  std::array<std::int16_t, kCount> lhs{};
  std::array<std::int16_t, kCount> rhs{};
  std::array<std::int16_t, kCount> out{};

  constexpr ProductTable() {
    int n = 0;
    for (int a = 0; a < kSize; ++a)
      for (int b = 0; b < kSize; ++b) {
        if (kMonomials.degree[a] + kMonomials.degree[b] > N) continue;
        const auto& ea = kMonomials.exps[a];
        const auto& eb = kMonomials.exps[b];
        lhs[n] = static_cast<std::int16_t>(a);
        rhs[n] = static_cast<std::int16_t>(b);
        out[n] = static_cast<std::int16_t>(
            kMonomials.index(ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]));
        ++n;
      }
  }
};

template <int N>
inline constexpr ProductTable<N> kProducts{};

}  // namespace detail

/// Multi-index of a partial derivative, e.g. {1,0,2,0} for d^3/dx0 dx2^2.
using MultiIndex = std::array<int, kDim>;

template <int N>
class Taylor {
  static_assert(N >= 0 && N <= kMaxOrder, "Taylor order out of range");

 public:
  static constexpr int kOrder = N;
  static constexpr int kSize = taylor_size(N);

  constexpr Taylor() = default;
  constexpr Taylor(double value) { c_[0] = value; }  // NOLINT: implicit by design of the algebra

  /// The coordinate function x_i - p_i with value v at the base point.
  static Taylor variable(int i, double v) {
    Taylor t(v);
    if constexpr (N >= 1) t.c_[1 + i] = 1.0;
    return t;
  }

  double value() const { return c_[0]; }
  double coeff(int k) const { return c_[k]; }
  double& coeff(int k) { return c_[k]; }
  const std::array<double, kSize>& coeffs() const { return c_; }
  std::array<double, kSize>& coeffs() { return c_; }

  /// Partial derivative d^alpha f at the base point; zero above order N.
  double derivative(const MultiIndex& alpha) const {
    const int deg = alpha[0] + alpha[1] + alpha[2] + alpha[3];
    if (deg > N) return 0.0;
    const int k = detail::kMonomials.index(alpha[0], alpha[1], alpha[2], alpha[3]);
    return c_[k] * detail::kMonomials.factorial[k];
  }

  void set_derivative(const MultiIndex& alpha, double v) {
    const int k = detail::kMonomials.index(alpha[0], alpha[1], alpha[2], alpha[3]);
    c_[k] = v / detail::kMonomials.factorial[k];
  }

  /// First partial derivative in direction i as a jet of one order less.
  Taylor<(N > 0 ? N - 1 : 0)> diff(int i) const {
    static_assert(N >= 1, "cannot differentiate an order-0 jet");
    Taylor<N - 1> r;
    for (int m = 0; m < Taylor<N - 1>::kSize; ++m) {
      const int s = detail::kMonomials.shift[i][m];
      r.coeffs()[m] = c_[s] * (detail::kMonomials.exps[m][i] + 1);
    }
    return r;
  }

  template <int M>
  Taylor<M> truncate() const {
    static_assert(M <= N, "truncate can only lower the order");
    Taylor<M> r;
    for (int k = 0; k < Taylor<M>::kSize; ++k) r.coeffs()[k] = c_[k];
    return r;
  }

  /// Lift to a higher order with zero high-order coefficients (exact for polynomials only).
  template <int M>
  Taylor<M> pad() const {
    static_assert(M >= N, "pad can only raise the order");
    Taylor<M> r;
    for (int k = 0; k < kSize; ++k) r.coeffs()[k] = c_[k];
    return r;
  }

  Taylor& operator+=(const Taylor& o) {
    for (int k = 0; k < kSize; ++k) c_[k] += o.c_[k];
    return *this;
  }
  Taylor& operator-=(const Taylor& o) {
    for (int k = 0; k < kSize; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Taylor& operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  Taylor& operator+=(double s) {
    c_[0] += s;
    return *this;
  }
  Taylor& operator*=(const Taylor& o) {
    *this = *this * o;
    return *this;
  }

  /// this += a * b, without forming the temporary product.
  void add_product(const Taylor& a, const Taylor& b) {
    const auto& t = detail::kProducts<N>;
    for (int k = 0; k < t.kCount; ++k) c_[t.out[k]] += a.c_[t.lhs[k]] * b.c_[t.rhs[k]];
  }

  friend Taylor operator*(const Taylor& a, const Taylor& b) {
    Taylor r;
    r.add_product(a, b);
    return r;
  }
  friend Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
  friend Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }
  friend Taylor operator-(Taylor a) {
    for (auto& v : a.c_) v = -v;
    return a;
  }
  friend Taylor operator*(Taylor a, double s) { return a *= s; }
  friend Taylor operator*(double s, Taylor a) { return a *= s; }
  friend Taylor operator+(Taylor a, double s) { return a += s; }
  friend Taylor operator+(double s, Taylor a) { return a += s; }
  friend Taylor operator-(Taylor a, double s) { return a += -s; }
  friend Taylor operator-(double s, const Taylor& a) { return (-a) += s; }
  friend Taylor operator/(Taylor a, double s) { return a *= (1.0 / s); }
  friend Taylor operator/(const Taylor& a, const Taylor& b) { return a * reciprocal(b); }
  friend Taylor operator/(double s, const Taylor& b) { return s * reciprocal(b); }

  /// f(a) given the normalized derivatives d[m] = f^(m)(a0) / m!.
  static Taylor compose(const Taylor& a, const std::array<double, N + 1>& d) {
    Taylor h = a;
    h.c_[0] = 0.0;
    Taylor r(d[N]);
    for (int m = N - 1; m >= 0; --m) {
      r = r * h;
      r.c_[0] += d[m];
    }
    return r;
  }

  friend Taylor reciprocal(const Taylor& a) {
    std::array<double, N + 1> d{};
    const double inv = 1.0 / a.value();
    double p = inv;
    for (int m = 0; m <= N; ++m) {
      d[m] = (m % 2 == 0 ? p : -p);
      p *= inv;
    }
    return compose(a, d);
  }

  friend Taylor pow(const Taylor& a, double e) {
    std::array<double, N + 1> d{};
    const double x = a.value();
    double coef = 1.0;  // binomial(e, m)
    for (int m = 0; m <= N; ++m) {
      d[m] = coef * std::pow(x, e - m);
      coef *= (e - m) / (m + 1);
    }
    return compose(a, d);
  }

  friend Taylor sqrt(const Taylor& a) { return pow(a, 0.5); }

  friend Taylor exp(const Taylor& a) {
    std::array<double, N + 1> d{};
    double v = std::exp(a.value());
    for (int m = 0; m <= N; ++m) {
      d[m] = v;
      v /= (m + 1);
    }
    return compose(a, d);
  }

  friend Taylor log(const Taylor& a) {
    std::array<double, N + 1> d{};
    const double x = a.value();
    d[0] = std::log(x);
    double p = 1.0 / x;
    for (int m = 1; m <= N; ++m) {
      d[m] = (m % 2 == 1 ? p : -p) / m;
      p /= x;
    }
    return compose(a, d);
  }

  friend Taylor sin(const Taylor& a) {
    std::array<double, N + 1> d{};
    const double s = std::sin(a.value()), c = std::cos(a.value());
    const double cyc[4] = {s, c, -s, -c};
    double fact = 1.0;
    for (int m = 0; m <= N; ++m) {
      if (m > 0) fact *= m;
      d[m] = cyc[m % 4] / fact;
    }
    return compose(a, d);
  }

  friend Taylor cos(const Taylor& a) {
    std::array<double, N + 1> d{};
    const double s = std::sin(a.value()), c = std::cos(a.value());
    const double cyc[4] = {c, -s, -c, s};
    double fact = 1.0;
    for (int m = 0; m <= N; ++m) {
      if (m > 0) fact *= m;
      d[m] = cyc[m % 4] / fact;
    }
    return compose(a, d);
  }

  friend Taylor tan(const Taylor& a) { return sin(a) / cos(a); }

  /// Evaluate the truncated polynomial at displacement dx from the base point.
  double evaluate(const std::array<double, kDim>& dx) const {
    double s = 0.0;
    for (int k = 0; k < kSize; ++k) {
      const auto& e = detail::kMonomials.exps[k];
      double m = c_[k];
      for (int i = 0; i < kDim; ++i)
        for (int p = 0; p < e[i]; ++p) m *= dx[i];
      s += m;
    }
    return s;
  }

 private:
  std::array<double, kSize> c_{};
};

/// The monomials y^alpha of the rotated coordinates x = Q y, (Q y)_i = sum_j Q[i][j] y_j.
template <int N>
std::vector<Taylor<N>> substitution_monomials(const std::array<std::array<double, kDim>, kDim>& q) {
  std::array<Taylor<N>, kDim> lin;
  for (int i = 0; i < kDim; ++i)
    if constexpr (N >= 1)
      for (int j = 0; j < kDim; ++j) lin[i].coeff(1 + j) = q[i][j];
  std::vector<Taylor<N>> mono(Taylor<N>::kSize);
  mono[0] = Taylor<N>(1.0);
  for (int m = 1; m < Taylor<N>::kSize; ++m) {
    const auto& e = detail::kMonomials.exps[m];
    int i = 0;
    while (e[i] == 0) ++i;
    std::array<int, kDim> p{e[0], e[1], e[2], e[3]};
    --p[i];
    mono[m] = mono[detail::kMonomials.index(p[0], p[1], p[2], p[3])] * lin[i];
  }
  return mono;
}

/// h(y) = f(Q y) given the monomials from substitution_monomials.
template <int N>
Taylor<N> linear_substitute(const Taylor<N>& f, const std::vector<Taylor<N>>& mono) {
  Taylor<N> out(f.value());
  for (int m = 1; m < Taylor<N>::kSize; ++m) {
    const double c = f.coeff(m);
    if (c == 0.0) continue;
    for (int k = 0; k < Taylor<N>::kSize; ++k) out.coeff(k) += c * mono[m].coeff(k);
  }
  return out;
}

template <int N>
Taylor<N> linear_substitute(const Taylor<N>& f, const std::array<std::array<double, kDim>, kDim>& q) {
  return linear_substitute(f, substitution_monomials<N>(q));
}

// Plain doubles participate in generic metric code through these overloads.
inline double value_of(double x) { return x; }
template <int N>
double value_of(const Taylor<N>& x) {
  return x.value();
}

}  // namespace bachgeom
