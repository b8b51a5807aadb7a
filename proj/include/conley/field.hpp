#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "conley/jet.hpp"

namespace conley {

/// Raised for malformed expression text; `offset` is the byte offset of the
/// offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Raised when an expression names a variable beyond the declared dimension.
class DimensionError : public std::runtime_error {
 public:
  DimensionError(const std::string& variable, int dim)
      : std::runtime_error("variable " + variable + " exceeds dimension " + std::to_string(dim)),
        variable_(variable) {}
  const std::string& variable() const { return variable_; }

 private:
  std::string variable_;
};

/// Raised when evaluation leaves the domain of a unary function.
class DomainError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class NodeKind { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Exp, Sin, Cos, Sqrt };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind;
  double value = 0.0;  // Const (always >= 0; negation is a Neg node)
  int index = 0;       // Var: zero-based variable index; Pow: integer exponent
  NodePtr lhs;
  NodePtr rhs;
};

/// Immutable expression tree over variables x1..xd, compiled to a postfix
/// program at construction so repeated evaluation is cheap.
class Expression {
 public:
  Expression(NodePtr root, int dim);

  const NodePtr& root() const { return root_; }
  int dim() const { return dim_; }

  double value(std::span<const double> x) const;
  Jet1 jet1(std::span<const double> x) const;
  Jet2 jet2(std::span<const double> x) const;

 private:
  struct Op {
    NodeKind kind;
    double value;
    int index;
  };
  template <typename T>
  T run(std::span<const double> x) const;

  NodePtr root_;
  int dim_;
  std::vector<Op> program_;
  std::size_t stack_depth_ = 0;
};

Expression parse_expression(const std::string& text, int dim);

/// Fully parenthesized text form; parse_expression(to_string(e)) reproduces
/// the tree exactly.
std::string to_string(const Expression& e);
std::string to_string(const NodePtr& n);

bool structurally_equal(const NodePtr& a, const NodePtr& b);

Jet2 evaluate_jet2(const Expression& e, std::span<const double> p);

// Node builders. They fold trivial identities (0 + a, 1 * a, constants) so
// symbolic derivatives stay small; they never reorder operands.
namespace build {
NodePtr constant(double v);
NodePtr variable(int index);
NodePtr add(NodePtr a, NodePtr b);
NodePtr sub(NodePtr a, NodePtr b);
NodePtr mul(NodePtr a, NodePtr b);
NodePtr div(NodePtr a, NodePtr b);
NodePtr pow(NodePtr a, int exponent);
NodePtr neg(NodePtr a);
NodePtr unary(NodeKind kind, NodePtr a);
}  // namespace build

/// Symbolic partial derivative with respect to variable `index`.
Expression derivative(const Expression& e, int index);

/// A smooth scalar field on R^d with value, gradient and Hessian access.
/// Fields built from expressions, products, affine maps and the index-pair
/// perturbation all share this interface.
class Field {
 public:
  class Impl {
   public:
    virtual ~Impl() = default;
    virtual int dim() const = 0;
    virtual double value(std::span<const double> x) const = 0;
    virtual Jet1 jet1(std::span<const double> x) const = 0;
    virtual Jet2 jet2(std::span<const double> x) const = 0;
  };

  Field() = default;
  explicit Field(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  explicit Field(Expression e);

  int dim() const { return impl_->dim(); }
  double value(std::span<const double> x) const { return impl_->value(x); }
  Jet1 jet1(std::span<const double> x) const { return impl_->jet1(x); }
  Jet2 jet2(std::span<const double> x) const { return impl_->jet2(x); }
  explicit operator bool() const { return static_cast<bool>(impl_); }

  /// scale * this + offset
  Field affine(double scale, double offset) const;
  Field times(const Field& other) const;

 private:
  std::shared_ptr<const Impl> impl_;
};

}  // namespace conley
