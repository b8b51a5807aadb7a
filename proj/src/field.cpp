#include "conley/field.hpp"

#include <Eigen/Dense>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace conley {

double hessian_norm(const Jet2& j) {
  if (j.dim == 1) return std::abs(j.hess[0][0]);
  if (j.dim == 2) {
    const double a = j.hess[0][0], b = j.hess[0][1], c = j.hess[1][1];
    const double mean = 0.5 * (a + c);
    const double rad = std::hypot(0.5 * (a - c), b);
    return std::max(std::abs(mean + rad), std::abs(mean - rad));
  }
  Eigen::MatrixXd h(j.dim, j.dim);
  for (int r = 0; r < j.dim; ++r)
    for (int c = 0; c < j.dim; ++c) h(r, c) = j.hess[r][c];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Builders

namespace build {
namespace {
bool is_const(const NodePtr& n, double v) { return n->kind == NodeKind::Const && n->value == v; }
NodePtr make(NodeKind k, NodePtr a = nullptr, NodePtr b = nullptr, int index = 0) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  n->index = index;
  return n;
}
}  // namespace

NodePtr constant(double v) {
  if (v < 0) return neg(constant(-v));
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Const;
  n->value = v;
  return n;
}

NodePtr variable(int index) { return make(NodeKind::Var, nullptr, nullptr, index); }

NodePtr add(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (a->kind == NodeKind::Const && b->kind == NodeKind::Const) return constant(a->value + b->value);
  return make(NodeKind::Add, std::move(a), std::move(b));
}

NodePtr sub(NodePtr a, NodePtr b) {
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return neg(std::move(b));
  return make(NodeKind::Sub, std::move(a), std::move(b));
}

NodePtr mul(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (a->kind == NodeKind::Const && b->kind == NodeKind::Const) return constant(a->value * b->value);
  if (a->kind == NodeKind::Neg) return neg(mul(a->lhs, std::move(b)));
  if (b->kind == NodeKind::Neg) return neg(mul(std::move(a), b->lhs));
  return make(NodeKind::Mul, std::move(a), std::move(b));
}

NodePtr div(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return constant(0.0);
  if (is_const(b, 1.0)) return a;
  return make(NodeKind::Div, std::move(a), std::move(b));
}

NodePtr pow(NodePtr a, int exponent) {
  if (exponent == 0) return constant(1.0);
  if (exponent == 1) return a;
  return make(NodeKind::Pow, std::move(a), nullptr, exponent);
}

NodePtr neg(NodePtr a) {
  if (is_const(a, 0.0)) return a;
  if (a->kind == NodeKind::Neg) return a->lhs;
  return make(NodeKind::Neg, std::move(a));
}

NodePtr unary(NodeKind kind, NodePtr a) { return make(kind, std::move(a)); }

}  // namespace build

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  Parser(const std::string& text, int dim) : s_(text), dim_(dim) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) throw ParseError("unexpected character '" + std::string(1, s_[pos_]) + "'", pos_);
    return e;
  }

 private:
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
  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= s_.size()) throw ParseError(std::string("expected '") + c + "' but reached end", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = raw(NodeKind::Add, lhs, term());
      } else if (accept('-')) {
        lhs = raw(NodeKind::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = raw(NodeKind::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = raw(NodeKind::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return raw(NodeKind::Neg, unary(), nullptr);
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (!accept('^')) return base;
    skip();
    const std::size_t start = pos_;
    bool negative = false;
    if (pos_ < s_.size() && s_[pos_] == '-') {
      negative = true;
      ++pos_;
    }
    const std::size_t digits = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (digits == pos_) throw ParseError("exponent must be an integer literal", start);
    int value = 0;
    auto [ptr, ec] = std::from_chars(s_.data() + digits, s_.data() + pos_, value);
    if (ec != std::errc()) throw ParseError("exponent out of range", start);
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Pow;
    n->lhs = base;
    n->index = negative ? -value : value;
    return n;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
  }

  NodePtr number() {
    const std::size_t start = pos_;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v, std::chars_format::general);
    if (ec != std::errc()) throw ParseError("malformed number", start);
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Const;
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    const std::string name = s_.substr(start, pos_ - start);
    if (name.size() > 1 && name[0] == 'x' &&
        name.find_first_not_of("0123456789", 1) == std::string::npos) {
      int idx = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (ec != std::errc() || idx < 1) throw ParseError("invalid variable '" + name + "'", start);
      if (idx > dim_) throw DimensionError(name, dim_);
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::Var;
      n->index = idx - 1;
      return n;
    }
    NodeKind kind;
    if (name == "exp") {
      kind = NodeKind::Exp;
    } else if (name == "sin") {
      kind = NodeKind::Sin;
    } else if (name == "cos") {
      kind = NodeKind::Cos;
    } else if (name == "sqrt") {
      kind = NodeKind::Sqrt;
    } else {
      throw ParseError("unknown identifier '" + name + "'", start);
    }
    expect('(');
    NodePtr arg = expr();
    expect(')');
    return raw(kind, arg, nullptr);
  }

  static NodePtr raw(NodeKind k, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  const std::string& s_;
  int dim_;
  std::size_t pos_ = 0;
};

void check_dim(const NodePtr& n, int dim) {
  if (!n) return;
  if (n->kind == NodeKind::Var && n->index >= dim) throw DimensionError("x" + std::to_string(n->index + 1), dim);
  check_dim(n->lhs, dim);
  check_dim(n->rhs, dim);
}

}  // namespace

Expression parse_expression(const std::string& text, int dim) {
  if (dim < 1 || dim > kMaxDim)
    throw DimensionError("dimension " + std::to_string(dim), kMaxDim);
  Parser p(text, dim);
  return Expression(p.parse(), dim);
}

// ---------------------------------------------------------------------------
// Printing and comparison

std::string to_string(const NodePtr& n) {
  switch (n->kind) {
    case NodeKind::Const: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", n->value);
      return buf;
    }
    case NodeKind::Var:
      return "x" + std::to_string(n->index + 1);
    case NodeKind::Add:
      return "(" + to_string(n->lhs) + " + " + to_string(n->rhs) + ")";
    case NodeKind::Sub:
      return "(" + to_string(n->lhs) + " - " + to_string(n->rhs) + ")";
    case NodeKind::Mul:
      return "(" + to_string(n->lhs) + " * " + to_string(n->rhs) + ")";
    case NodeKind::Div:
      return "(" + to_string(n->lhs) + " / " + to_string(n->rhs) + ")";
    case NodeKind::Pow:
      return "(" + to_string(n->lhs) + "^" + std::to_string(n->index) + ")";
    case NodeKind::Neg:
      return "(-" + to_string(n->lhs) + ")";
    case NodeKind::Exp:
      return "exp(" + to_string(n->lhs) + ")";
    case NodeKind::Sin:
      return "sin(" + to_string(n->lhs) + ")";
    case NodeKind::Cos:
      return "cos(" + to_string(n->lhs) + ")";
    case NodeKind::Sqrt:
      return "sqrt(" + to_string(n->lhs) + ")";
  }
  return {};
}

std::string to_string(const Expression& e) { return to_string(e.root()); }

bool structurally_equal(const NodePtr& a, const NodePtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  if (a->kind == NodeKind::Const) return a->value == b->value;
  if (a->kind == NodeKind::Var || a->kind == NodeKind::Pow) {
    if (a->index != b->index) return false;
  }
  return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

void compile(const NodePtr& n, auto& program) {
  if (n->lhs) compile(n->lhs, program);
  if (n->rhs) compile(n->rhs, program);
  program.push_back({n->kind, n->value, n->index});
}

double ipow(double a, int n) {
  double r = 1.0;
  double b = a;
  unsigned e = static_cast<unsigned>(n < 0 ? -n : n);
  while (e) {
    if (e & 1u) r *= b;
    b *= b;
    e >>= 1u;
  }
  return n < 0 ? 1.0 / r : r;
}

// Scalar kernels: value, first and second derivative of each unary map.
struct Scalar3 {
  double v, d1, d2;
};

Scalar3 kernel(NodeKind k, double a, int exponent, bool derivatives) {
  switch (k) {
    case NodeKind::Exp: {
      const double e = std::exp(a);
      return {e, e, e};
    }
    case NodeKind::Sin:
      return {std::sin(a), std::cos(a), -std::sin(a)};
    case NodeKind::Cos:
      return {std::cos(a), -std::sin(a), -std::cos(a)};
    case NodeKind::Sqrt: {
      if (a < 0.0 || std::isnan(a)) throw DomainError("sqrt of negative argument");
      if (derivatives && a == 0.0) throw DomainError("sqrt is not differentiable at 0");
      const double s = std::sqrt(a);
      if (!derivatives) return {s, 0.0, 0.0};
      return {s, 0.5 / s, -0.25 / (s * a)};
    }
    case NodeKind::Pow: {
      if (exponent < 0 && a == 0.0) throw DomainError("negative power of zero");
      const double n = exponent;
      if (!derivatives) return {ipow(a, exponent), 0.0, 0.0};
      const double d1 = exponent == 0 ? 0.0 : n * ipow(a, exponent - 1);
      const double d2 = (exponent == 0 || exponent == 1) ? 0.0 : n * (n - 1) * ipow(a, exponent - 2);
      return {ipow(a, exponent), d1, d2};
    }
    default:
      return {a, 1.0, 0.0};
  }
}

Jet1 make_var(const Jet1&, int n, int i, double v) { return Jet1::variable(n, i, v); }
Jet2 make_var(const Jet2&, int n, int i, double v) { return Jet2::variable(n, i, v); }
Jet1 make_const(const Jet1&, int n, double v) { return Jet1::constant(n, v); }
Jet2 make_const(const Jet2&, int n, double v) { return Jet2::constant(n, v); }

Jet1 apply(const Jet1& a, const Scalar3& s) { return chain(a, s.v, s.d1); }
Jet2 apply(const Jet2& a, const Scalar3& s) { return chain(a, s.v, s.d1, s.d2); }

}  // namespace

Expression::Expression(NodePtr root, int dim) : root_(std::move(root)), dim_(dim) {
  if (!root_) throw std::invalid_argument("empty expression");
  check_dim(root_, dim_);
  compile(root_, program_);
  std::size_t depth = 0;
  for (const auto& op : program_) {
    switch (op.kind) {
      case NodeKind::Const:
      case NodeKind::Var:
        ++depth;
        break;
      case NodeKind::Add:
      case NodeKind::Sub:
      case NodeKind::Mul:
      case NodeKind::Div:
        --depth;
        break;
      default:
        break;
    }
    stack_depth_ = std::max(stack_depth_, depth);
  }
}

template <typename T>
T Expression::run(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) throw std::invalid_argument("point dimension mismatch");
  constexpr bool plain = std::is_same_v<T, double>;
  std::vector<T> stack;
  stack.reserve(stack_depth_);
  const T proto{};
  for (const auto& op : program_) {
    switch (op.kind) {
      case NodeKind::Const:
        if constexpr (plain) {
          stack.push_back(op.value);
        } else {
          stack.push_back(make_const(proto, dim_, op.value));
        }
        break;
      case NodeKind::Var:
        if constexpr (plain) {
          stack.push_back(x[op.index]);
        } else {
          stack.push_back(make_var(proto, dim_, op.index, x[op.index]));
        }
        break;
      case NodeKind::Add:
      case NodeKind::Sub:
      case NodeKind::Mul:
      case NodeKind::Div: {
        T b = std::move(stack.back());
        stack.pop_back();
        T& a = stack.back();
        if (op.kind == NodeKind::Add) {
          a = a + b;
        } else if (op.kind == NodeKind::Sub) {
          a = a - b;
        } else if (op.kind == NodeKind::Mul) {
          a = a * b;
        } else {
          double bv;
          if constexpr (plain) {
            bv = b;
          } else {
            bv = b.value;
          }
          if (bv == 0.0) throw DomainError("division by zero");
          if constexpr (plain) {
            a = a / b;
          } else {
            a = a * apply(b, Scalar3{1.0 / bv, -1.0 / (bv * bv), 2.0 / (bv * bv * bv)});
          }
        }
        break;
      }
      case NodeKind::Neg:
        stack.back() = -stack.back();
        break;
      default: {
        T& a = stack.back();
        if constexpr (plain) {
          a = kernel(op.kind, a, op.index, false).v;
        } else {
          a = apply(a, kernel(op.kind, a.value, op.index, true));
        }
        break;
      }
    }
  }
  if constexpr (plain) {
    if (!std::isfinite(stack.back())) throw DomainError("non-finite value");
  } else {
    if (!std::isfinite(stack.back().value)) throw DomainError("non-finite value");
  }
  return stack.back();
}

double Expression::value(std::span<const double> x) const { return run<double>(x); }
Jet1 Expression::jet1(std::span<const double> x) const { return run<Jet1>(x); }
Jet2 Expression::jet2(std::span<const double> x) const { return run<Jet2>(x); }

Jet2 evaluate_jet2(const Expression& e, std::span<const double> p) {
  for (double v : p)
    if (!std::isfinite(v)) throw DomainError("non-finite evaluation point");
  return e.jet2(p);
}

// ---------------------------------------------------------------------------
// Symbolic differentiation

namespace {
NodePtr diff(const NodePtr& n, int i) {
  using namespace build;
  switch (n->kind) {
    case NodeKind::Const:
      return constant(0.0);
    case NodeKind::Var:
      return constant(n->index == i ? 1.0 : 0.0);
    case NodeKind::Add:
      return add(diff(n->lhs, i), diff(n->rhs, i));
    case NodeKind::Sub:
      return sub(diff(n->lhs, i), diff(n->rhs, i));
    case NodeKind::Mul:
      return add(mul(diff(n->lhs, i), n->rhs), mul(n->lhs, diff(n->rhs, i)));
    case NodeKind::Div:
      return div(sub(mul(diff(n->lhs, i), n->rhs), mul(n->lhs, diff(n->rhs, i))), pow(n->rhs, 2));
    case NodeKind::Pow:
      return mul(mul(constant(n->index), pow(n->lhs, n->index - 1)), diff(n->lhs, i));
    case NodeKind::Neg:
      return neg(diff(n->lhs, i));
    case NodeKind::Exp:
      return mul(n, diff(n->lhs, i));
    case NodeKind::Sin:
      return mul(unary(NodeKind::Cos, n->lhs), diff(n->lhs, i));
    case NodeKind::Cos:
      return neg(mul(unary(NodeKind::Sin, n->lhs), diff(n->lhs, i)));
    case NodeKind::Sqrt:
      return div(diff(n->lhs, i), mul(constant(2.0), n));
  }
  return constant(0.0);
}
}  // namespace

Expression derivative(const Expression& e, int index) {
  if (index < 0 || index >= e.dim()) throw std::out_of_range("derivative index");
  return Expression(diff(e.root(), index), e.dim());
}

// ---------------------------------------------------------------------------
// Fields

namespace {

class ExpressionField final : public Field::Impl {
 public:
  explicit ExpressionField(Expression e) : e_(std::move(e)) {}
  int dim() const override { return e_.dim(); }
  double value(std::span<const double> x) const override { return e_.value(x); }
  Jet1 jet1(std::span<const double> x) const override { return e_.jet1(x); }
  Jet2 jet2(std::span<const double> x) const override { return e_.jet2(x); }

 private:
  Expression e_;
};

class AffineField final : public Field::Impl {
 public:
  AffineField(Field f, double scale, double offset) : f_(std::move(f)), scale_(scale), offset_(offset) {}
  int dim() const override { return f_.dim(); }
  double value(std::span<const double> x) const override { return scale_ * f_.value(x) + offset_; }
  Jet1 jet1(std::span<const double> x) const override {
    Jet1 j = scale_ * f_.jet1(x);
    j.value += offset_;
    return j;
  }
  Jet2 jet2(std::span<const double> x) const override {
    Jet2 j = scale_ * f_.jet2(x);
    j.value += offset_;
    return j;
  }

 private:
  Field f_;
  double scale_, offset_;
};

class ProductField final : public Field::Impl {
 public:
  ProductField(Field a, Field b) : a_(std::move(a)), b_(std::move(b)) {}
  int dim() const override { return a_.dim(); }
  double value(std::span<const double> x) const override { return a_.value(x) * b_.value(x); }
  Jet1 jet1(std::span<const double> x) const override { return a_.jet1(x) * b_.jet1(x); }
  Jet2 jet2(std::span<const double> x) const override { return a_.jet2(x) * b_.jet2(x); }

 private:
  Field a_, b_;
};

}  // namespace

Field::Field(Expression e) : impl_(std::make_shared<ExpressionField>(std::move(e))) {}

Field Field::affine(double scale, double offset) const {
  return Field(std::make_shared<AffineField>(*this, scale, offset));
}

Field Field::times(const Field& other) const { return Field(std::make_shared<ProductField>(*this, other)); }

}  // namespace conley
