#include "finsler/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

#include "finsler/errors.hpp"

namespace finsler {

namespace {

enum class Op { number, x, y, neg, add, sub, mul, div, ipow, rpow, fn };
enum class Fn { sin, cos, tan, tanh, exp, log, sqrt };

struct Node {
  Op op;
  double value = 0.0;
  int index = 0;
  Fn fn = Fn::sin;
  std::unique_ptr<Node> lhs, rhs;
};

using NodePtr = std::unique_ptr<Node>;

template <class T>
T eval(const Node& n, std::span<const T> x, std::span<const T> y) {
  using std::cos;
  using std::exp;
  using std::log;
  using std::pow;
  using std::sin;
  using std::sqrt;
  using std::tan;
  using std::tanh;
  switch (n.op) {
    case Op::number:
      return zero_like(x[0]) + n.value;
    case Op::x:
      return x[n.index];
    case Op::y:
      return y[n.index];
    case Op::neg:
      return -eval(*n.lhs, x, y);
    case Op::add:
      return eval(*n.lhs, x, y) + eval(*n.rhs, x, y);
    case Op::sub:
      return eval(*n.lhs, x, y) - eval(*n.rhs, x, y);
    case Op::mul:
      return eval(*n.lhs, x, y) * eval(*n.rhs, x, y);
    case Op::div:
      return eval(*n.lhs, x, y) / eval(*n.rhs, x, y);
    case Op::ipow:
      return pow(eval(*n.lhs, x, y), n.index);
    case Op::rpow:
      return pow(eval(*n.lhs, x, y), eval(*n.rhs, x, y));
    case Op::fn: {
      T a = eval(*n.lhs, x, y);
      switch (n.fn) {
        case Fn::sin: return sin(a);
        case Fn::cos: return cos(a);
        case Fn::tan: return tan(a);
        case Fn::tanh: return tanh(a);
        case Fn::exp: return exp(a);
        case Fn::log: return log(a);
        case Fn::sqrt: return sqrt(a);
      }
    }
  }
  return zero_like(x[0]);
}

// Jets have no jet-valued exponent; a real power needs a constant exponent.
template <>
Jet eval<Jet>(const Node& n, std::span<const Jet> x, std::span<const Jet> y);

double constant_value(const Node& n) {
  switch (n.op) {
    case Op::number: return n.value;
    case Op::neg: return -constant_value(*n.lhs);
    default: break;
  }
  std::vector<double> zero(1, 0.0);
  return eval<double>(n, zero, zero);
}

bool is_constant(const Node& n) {
  if (n.op == Op::x || n.op == Op::y) return false;
  if (n.lhs && !is_constant(*n.lhs)) return false;
  if (n.rhs && !is_constant(*n.rhs)) return false;
  return true;
}

template <>
Jet eval<Jet>(const Node& n, std::span<const Jet> x, std::span<const Jet> y) {
  switch (n.op) {
    case Op::number: return x[0].zero_like() + n.value;
    case Op::x: return x[n.index];
    case Op::y: return y[n.index];
    case Op::neg: return -eval(*n.lhs, x, y);
    case Op::add: return eval(*n.lhs, x, y) + eval(*n.rhs, x, y);
    case Op::sub: return eval(*n.lhs, x, y) - eval(*n.rhs, x, y);
    case Op::mul: return eval(*n.lhs, x, y) * eval(*n.rhs, x, y);
    case Op::div: return eval(*n.lhs, x, y) / eval(*n.rhs, x, y);
    case Op::ipow: return pow(eval(*n.lhs, x, y), n.index);
    case Op::rpow: return pow(eval(*n.lhs, x, y), constant_value(*n.rhs));
    case Op::fn: {
      Jet a = eval(*n.lhs, x, y);
      switch (n.fn) {
        case Fn::sin: return sin(a);
        case Fn::cos: return cos(a);
        case Fn::tan: return tan(a);
        case Fn::tanh: return tanh(a);
        case Fn::exp: return exp(a);
        case Fn::log: return log(a);
        case Fn::sqrt: return sqrt(a);
      }
    }
  }
  return x[0].zero_like();
}

class Parser {
 public:
  Parser(const std::string& s, int dim, bool allow_fiber)
      : s_(s), dim_(dim), allow_fiber_(allow_fiber) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("expression \"" + s_ + "\" at position " + std::to_string(pos_) + ": " +
                      msg);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_unique<Node>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  NodePtr expr() {
    NodePtr n = term();
    while (true) {
      if (accept('+')) n = make(Op::add, std::move(n), term());
      else if (accept('-')) n = make(Op::sub, std::move(n), term());
      else return n;
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    while (true) {
      if (accept('*')) n = make(Op::mul, std::move(n), unary());
      else if (accept('/')) n = make(Op::div, std::move(n), unary());
      else return n;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  // Right associative; binds tighter than unary minus on its left operand.
  NodePtr power() {
    NodePtr base = primary();
    if (!accept('^')) return base;
    NodePtr exponent = unary();
    if (!is_constant(*exponent)) fail("exponent must not depend on coordinates");
    const double e = constant_value(*exponent);
    if (e == std::floor(e) && std::abs(e) <= 64) {
      NodePtr n = make(Op::ipow, std::move(base));
      n->index = static_cast<int>(e);
      return n;
    }
    return make(Op::rpow, std::move(base), std::move(exponent));
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (accept('(')) {
      NodePtr n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      NodePtr n = make(Op::number);
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string word = s_.substr(start, pos_ - start);
      if (word == "pi" || word == "e") {
        NodePtr n = make(Op::number);
        n->value = word == "pi" ? std::numbers::pi : std::numbers::e;
        return n;
      }
      if ((word[0] == 'x' || word[0] == 'y') && word.size() > 1 &&
          word.find_first_not_of("0123456789", 1) == std::string::npos) {
        const int idx = std::stoi(word.substr(1));
        if (idx < 1 || idx > dim_) {
          pos_ = start;
          fail("coordinate " + word + " outside dimension " + std::to_string(dim_));
        }
        if (word[0] == 'y' && !allow_fiber_) {
          pos_ = start;
          fail("fiber coordinate " + word + " not allowed here");
        }
        NodePtr n = make(word[0] == 'x' ? Op::x : Op::y);
        n->index = idx - 1;
        return n;
      }
      static const std::pair<const char*, Fn> fns[] = {
          {"sin", Fn::sin}, {"cos", Fn::cos},   {"tan", Fn::tan},  {"tanh", Fn::tanh},
          {"exp", Fn::exp}, {"log", Fn::log},   {"sqrt", Fn::sqrt}};
      for (const auto& [name, fn] : fns) {
        if (word == name) {
          if (!accept('(')) fail("expected '(' after " + word);
          NodePtr n = make(Op::fn, expr());
          n->fn = fn;
          if (!accept(')')) fail("expected ')'");
          return n;
        }
      }
      pos_ = start;
      fail("unknown identifier '" + word + "'");
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  int dim_;
  bool allow_fiber_;
  std::size_t pos_ = 0;
};

class ExpressionField final : public ScalarField {
 public:
  ExpressionField(NodePtr root, int dim) : root_(std::move(root)), dim_(dim) {}
  int dim() const override { return dim_; }
  Jet operator()(std::span<const Jet> x, std::span<const Jet> y) const override {
    return eval<Jet>(*root_, x, y);
  }
  double operator()(std::span<const double> x, std::span<const double> y) const override {
    return eval<double>(*root_, x, y);
  }
  long double operator()(std::span<const long double> x,
                         std::span<const long double> y) const override {
    return eval<long double>(*root_, x, y);
  }

 private:
  NodePtr root_;
  int dim_;
};

}  // namespace

std::shared_ptr<const ScalarField> parse_expression(const std::string& source, int dim,
                                                    bool allow_fiber) {
  if (dim < 1) throw ConfigError("expression dimension must be >= 1");
  Parser p(source, dim, allow_fiber);
  return std::make_shared<ExpressionField>(p.parse(), dim);
}

}  // namespace finsler
