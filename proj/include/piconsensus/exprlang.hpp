#pragma once

// Arithmetic expression language for agent regressor components.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | name | name '(' expr ')' | '(' expr ')'
//
// `^` binds tighter than unary minus, so -x^2 == -(x^2) and 2^-1 == 0.5.
// Names are either declared variables, the constant `pi`, or one of the
// functions sin cos tan exp sqrt abs.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "piconsensus/errors.hpp"

namespace piconsensus {

enum class ExprFunction : std::uint8_t { Sin, Cos, Tan, Exp, Sqrt, Abs };

struct ExprNode {
  enum class Kind : std::uint8_t { Number, Variable, Pi, Negate, Add, Sub, Mul, Div, Pow, Call };

  Kind kind;
  double value = 0.0;       // Number
  std::uint32_t slot = 0;   // Variable: index into Expr::variables()
  ExprFunction function{};  // Call
  std::int32_t lhs = -1;    // Negate, Call, binary
  std::int32_t rhs = -1;    // binary

  friend bool operator==(const ExprNode&, const ExprNode&) = default;
};

/// Immutable parsed expression. Nodes are stored in a flat array in
/// post-order; the root is the last node.
class Expr {
 public:
  /// Parses `source`, resolving identifiers against `variables`. Throws
  /// ExprError with the byte offset of the offending token.
  static Expr parse(std::string_view source, std::vector<std::string> variables);

  /// Positional evaluation: `values[k]` binds `variables()[k]`.
  double evaluate(std::span<const double> values) const;

  /// Evaluation by name. Throws ExprError(UnboundVariable) when a variable
  /// the expression actually uses is missing.
  double evaluate(const std::map<std::string, double>& bindings) const;

  /// Fully parenthesized rendering that parses back to an equal tree.
  std::string to_string() const;

  const std::vector<std::string>& variables() const noexcept { return variables_; }
  const std::vector<ExprNode>& nodes() const noexcept { return nodes_; }
  const std::string& source() const noexcept { return source_; }

  /// True when the variable at `slot` occurs in the tree.
  bool uses(std::uint32_t slot) const;

  /// Structural equality of trees and variable lists (source text ignored).
  friend bool operator==(const Expr& a, const Expr& b) {
    return a.variables_ == b.variables_ && a.nodes_ == b.nodes_;
  }

 private:
  friend class ExprParser;

  std::vector<std::string> variables_;
  std::vector<ExprNode> nodes_;
  std::string source_;
};

inline Expr parse_expression(std::string_view source, std::vector<std::string> variables) {
  return Expr::parse(source, std::move(variables));
}

}  // namespace piconsensus
