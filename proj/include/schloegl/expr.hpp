#pragma once

// Closed-form expressions in x and t.
//
// Grammar:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'x' | 't' | 'pi' | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | exp | log | sqrt | tanh
//
// '^' is right associative and binds tighter than unary minus on its left:
// -x^2 == -(x^2).

#include <memory>
#include <string>
#include <string_view>

namespace schloegl {

class Expr {
 public:
  enum class Var { X, T };

  /// Throws ConfigError with the offending position on malformed input.
  static Expr parse(std::string_view text);
  static Expr constant(double value);
  static Expr variable(Var v);

  double eval(double x, double t) const;
  Expr derivative(Var v) const;
  bool is_constant() const;
  /// Fully parenthesized, re-parseable text.
  std::string to_string() const;

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

}  // namespace schloegl
