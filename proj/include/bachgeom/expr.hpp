#pragma once

// Small arithmetic expression language over the chart coordinates.
//
//   expr := term (('+' | '-') term)*
//   term := unary (('*' | '/') unary)*
//   unary := '-' unary | power
//   power := atom ('^' unary)?
//   atom := number | name | name '(' expr ')' | '(' expr ')'
//
// Coordinates are x1..x4 (aliases x, y, z, w); named parameters and `pi` are constants.
// Functions: sin cos tan exp log sqrt.

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "bachgeom/error.hpp"
#include "bachgeom/types.hpp"

namespace bachgeom {

class Expression {
 public:
  enum class Op { kConst, kVar, kNeg, kAdd, kSub, kMul, kDiv, kPow, kSin, kCos, kTan, kExp, kLog, kSqrt };

  struct Node {
    Op op = Op::kConst;
    double value = 0.0;
    int var = 0;
    std::unique_ptr<Node> a, b;
  };

  Expression() = default;
  static Expression parse(const std::string& text, const std::map<std::string, double>& params = {});

  const std::string& text() const { return text_; }
  bool empty() const { return !root_; }
  /// True when the expression does not depend on coordinate i.
  bool independent_of(int i) const;

  template <class T>
  T evaluate(const std::array<T, kDim>& x) const {
    return eval(*root_, x);
  }

 private:
  template <class T>
  static T eval(const Node& n, const std::array<T, kDim>& x) {
    using std::cos;
    using std::exp;
    using std::log;
    using std::pow;
    using std::sin;
    using std::sqrt;
    using std::tan;
    switch (n.op) {
      case Op::kConst: return T(n.value);
      case Op::kVar: return x[n.var];
      case Op::kNeg: return -eval(*n.a, x);
      case Op::kAdd: return eval(*n.a, x) + eval(*n.b, x);
      case Op::kSub: return eval(*n.a, x) - eval(*n.b, x);
      case Op::kMul: return eval(*n.a, x) * eval(*n.b, x);
      case Op::kDiv: return eval(*n.a, x) / eval(*n.b, x);
      case Op::kPow:
        if (n.b->op == Op::kConst) return power(eval(*n.a, x), n.b->value);
        return exp(eval(*n.b, x) * log(eval(*n.a, x)));
      case Op::kSin: return sin(eval(*n.a, x));
      case Op::kCos: return cos(eval(*n.a, x));
      case Op::kTan: return tan(eval(*n.a, x));
      case Op::kExp: return exp(eval(*n.a, x));
      case Op::kLog: return log(eval(*n.a, x));
      case Op::kSqrt: return sqrt(eval(*n.a, x));
    }
    return T(0.0);
  }

  template <class T>
  static T power(const T& base, double e) {
    using std::pow;
    const double r = std::round(e);
    if (r == e && std::abs(r) <= 8) {
      T acc(1.0);
      for (int k = 0; k < static_cast<int>(std::abs(r)); ++k) acc = acc * base;
      return r < 0 ? T(1.0) / acc : acc;
    }
    return pow(base, e);
  }

  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace bachgeom
