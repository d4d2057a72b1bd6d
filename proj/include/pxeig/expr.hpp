#pragma once

// Tiny arithmetic language for exponent fields p(x), q(x).
//
// Grammar (lowest to highest precedence):
//   expr    := term   (('+' | '-') term)*
//   term    := power  (('*' | '/') power)*
//   power   := unary  ('^' power)?          right-associative
//   unary   := '-' unary | primary          so -x^2 == (-x)^2
//   primary := number | 'x' | 'y' | func '(' args ')' | '(' expr ')'
// Functions: sin, cos, exp, abs (one argument), min, max (two arguments).

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pxeig/error.hpp"

namespace pxeig {

/// Syntax or binding error, with the 0-based character offset of the culprit.
class ExprError : public InputError {
 public:
  ExprError(const std::string& message, std::size_t position);
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class Expr {
 public:
  enum class Kind { Number, VarX, VarY, Neg, Add, Sub, Mul, Div, Pow, Call };
  enum class Func { Sin, Cos, Exp, Abs, Min, Max };

  static Expr number(double value);
  static Expr var_x();
  static Expr var_y();
  static Expr negate(Expr operand);
  static Expr binary(Kind op, Expr lhs, Expr rhs);
  static Expr call(Func f, std::vector<Expr> args);

  Kind kind() const { return node_->kind; }
  double value() const { return node_->value; }
  Func func() const { return node_->func; }
  const std::vector<Expr>& children() const { return node_->children; }

  /// Evaluates at (x, y). Non-finite results and singular operations throw DomainError.
  double eval(double x, double y = 0.0) const;

  /// Fully parenthesized text that parses back to an identical tree.
  std::string to_string() const;

  bool uses_y() const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  struct Node {
    Kind kind = Kind::Number;
    double value = 0.0;
    Func func = Func::Sin;
    std::vector<Expr> children;
  };
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Parses `source`. With `dim == 1` the variable `y` is rejected as unknown.
Expr parse_expr(std::string_view source, int dim = 2);

}  // namespace pxeig
