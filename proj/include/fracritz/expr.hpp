#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "fracritz/errors.hpp"

namespace fracritz {

/// Reserved variables of the expression language. `t` parses as X.
enum class Symbol { X, Y, Yp, D, U };

/// Dependent-variable slots an expression can be differentiated against.
enum class Slot { Y, Yp, D, U };

enum class Func { Sin, Cos, Exp, Ln, Sqrt, Abs, Gamma };

std::string to_string(Symbol s);
std::string to_string(Func f);
Symbol slot_symbol(Slot s);

/// Values bound to the reserved symbols during evaluation.
struct EvalContext {
  double x = 0.0;
  double y = 0.0;
  double yp = 0.0;
  double D = 0.0;
  double u = 0.0;

  double get(Symbol s) const noexcept;
  void set(Symbol s, double v) noexcept;
};

/// Parse failure; `position` is the 0-based byte offset into the source.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& msg, std::size_t position);
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnknownSymbolError : public SyntaxError {
 public:
  using SyntaxError::SyntaxError;
};

class UnknownFunctionError : public SyntaxError {
 public:
  using SyntaxError::SyntaxError;
};

/// Runtime evaluation failure (division by zero, ln of a non-positive value,
/// ...). `position` is the source offset of the failing node, or -1 for
/// nodes synthesized by differentiation or substitution.
class EvalError : public Error {
 public:
  EvalError(const std::string& msg, long position);
  long position() const noexcept { return position_; }

 private:
  long position_;
};

/// Differentiation through a node that has no derivative rule (abs, or
/// gamma of a slot-dependent argument).
class UnsupportedDerivative : public Error {
 public:
  using Error::Error;
};

/// Immutable expression tree with shared subtrees.
///
/// Grammar (whitespace ignored):
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?
///   primary := number | symbol | func '(' expr ')' | '(' expr ')'
/// so '^' is right-associative and binds tighter than unary minus.
class Expr {
 public:
  enum class Kind { Constant, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };

  struct Node {
    Kind kind;
    double value = 0.0;        // Constant
    Symbol symbol = Symbol::X; // Variable
    Func func = Func::Sin;     // Call
    std::shared_ptr<const Node> lhs;  // operand of Negate/Call, left of binary
    std::shared_ptr<const Node> rhs;
    long position = -1;
  };

  /// The constant 0.
  Expr();

  static Expr parse(std::string_view src);
  static Expr constant(double v);
  static Expr variable(Symbol s);

  double evaluate(const EvalContext& ctx) const;

  /// Symbolic partial derivative with respect to a slot, simplified by
  /// constant folding and 0/1 absorption only.
  Expr partial(Slot slot) const;

  /// Every occurrence of `s` replaced by `replacement`.
  Expr substitute(Symbol s, const Expr& replacement) const;

  bool references(Symbol s) const;
  bool is_constant() const noexcept { return node_->kind == Kind::Constant; }
  bool is_zero() const noexcept { return is_constant() && node_->value == 0.0; }

  /// Minimal-parenthesis infix form that re-parses to the same tree.
  std::string to_string() const;

  bool structurally_equal(const Expr& other) const;

  const Node& root() const noexcept { return *node_; }

  friend Expr operator+(const Expr& l, const Expr& r);
  friend Expr operator-(const Expr& l, const Expr& r);
  friend Expr operator*(const Expr& l, const Expr& r);
  friend Expr operator/(const Expr& l, const Expr& r);
  friend Expr operator-(const Expr& e);
  friend Expr pow(const Expr& base, const Expr& exponent);
  friend Expr call(Func f, const Expr& arg);

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

}  // namespace fracritz
