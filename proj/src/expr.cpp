#include "bachgeom/expr.hpp"

#include <cctype>
#include <cstdlib>
#include <numbers>

namespace bachgeom {

namespace {

using Node = Expression::Node;
using Op = Expression::Op;

class Parser {
 public:
  Parser(const std::string& s, const std::map<std::string, double>& params) : s_(s), params_(params) {}

  std::unique_ptr<Node> parse() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) error("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::kConfigParse, "expression '" + s_ + "' at " + std::to_string(pos_) + ": " + what);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static std::unique_ptr<Node> make(Op op, std::unique_ptr<Node> a = nullptr, std::unique_ptr<Node> b = nullptr) {
    auto n = std::make_unique<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  static std::unique_ptr<Node> constant(double v) {
    auto n = make(Op::kConst);
    n->value = v;
    return n;
  }

  std::unique_ptr<Node> expr() {
    auto n = term();
    for (;;) {
      if (eat('+'))
        n = make(Op::kAdd, std::move(n), term());
      else if (eat('-'))
        n = make(Op::kSub, std::move(n), term());
      else
        return n;
    }
  }

  std::unique_ptr<Node> term() {
    auto n = unary();
    for (;;) {
      if (eat('*'))
        n = make(Op::kMul, std::move(n), unary());
      else if (eat('/'))
        n = make(Op::kDiv, std::move(n), unary());
      else
        return n;
    }
  }

  std::unique_ptr<Node> unary() {
    if (eat('-')) return make(Op::kNeg, unary());
    if (eat('+')) return unary();
    return power();
  }

  std::unique_ptr<Node> power() {
    auto n = atom();
    if (eat('^')) n = make(Op::kPow, std::move(n), unary());
    return n;
  }

  std::unique_ptr<Node> atom() {
    skip();
    if (pos_ >= s_.size()) error("unexpected end of input");
    const char c = s_[pos_];
    if (eat('(')) {
      auto n = expr();
      if (!eat(')')) error("missing ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) error("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      return constant(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string name;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        name += s_[pos_++];
      static const std::map<std::string, Op> funcs{{"sin", Op::kSin}, {"cos", Op::kCos}, {"tan", Op::kTan},
                                                   {"exp", Op::kExp}, {"log", Op::kLog}, {"sqrt", Op::kSqrt}};
      if (auto f = funcs.find(name); f != funcs.end()) {
        if (!eat('(')) error("expected '(' after " + name);
        auto arg = expr();
        if (!eat(')')) error("missing ')'");
        return make(f->second, std::move(arg));
      }
      static const std::map<std::string, int> vars{{"x1", 0}, {"x2", 1}, {"x3", 2}, {"x4", 3},
                                                   {"x", 0},  {"y", 1},  {"z", 2},  {"w", 3}};
      if (auto v = vars.find(name); v != vars.end()) {
        auto n = make(Op::kVar);
        n->var = v->second;
        return n;
      }
      if (auto p = params_.find(name); p != params_.end()) return constant(p->second);
      if (name == "pi") return constant(std::numbers::pi);
      error("unknown name '" + name + "'");
    }
    error("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  const std::map<std::string, double>& params_;
  std::size_t pos_ = 0;
};

bool uses_var(const Node& n, int i) {
  if (n.op == Op::kVar) return n.var == i;
  return (n.a && uses_var(*n.a, i)) || (n.b && uses_var(*n.b, i));
}

}  // namespace

Expression Expression::parse(const std::string& text, const std::map<std::string, double>& params) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(text, params).parse();
  return e;
}

bool Expression::independent_of(int i) const { return !root_ || !uses_var(*root_, i); }

}  // namespace bachgeom
