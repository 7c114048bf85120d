#pragma once

/**
 * @file expr.hpp
 * @brief Power-law / exponential expressions with exact rational exponents.
 *
 * Grammar accepted by parse_expr (whitespace ignored):
 *
 *     expr     := ['+'|'-'] term (('+'|'-') term)*
 *     term     := unary (('*'|'/') unary)*
 *     unary    := '-' unary | factor
 *     factor   := base ('^' exponent)?
 *     exponent := '(' rational ')' | int
 *     base     := number | ident | '(' expr ')' | 'exp' '(' expr ')'
 *     rational := ['-'|'+'] int ('/' int)?
 *
 * Integer literals are exact; literals with a decimal point or exponent are
 * stored as doubles. a/b is read as a * b^(-1). to_string emits text in the
 * same grammar, so parse(to_string(e)) evaluates identically to e.
 */

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "superosc/numkit/rational.hpp"

namespace superosc::numkit {

struct ExprNode;

class Expr {
 public:
  enum class Kind { Constant, Variable, Sum, Product, Power, Exp };

  /// The exact constant 0.
  Expr();

  static Expr constant(Rational value);
  static Expr constant(long long value) { return constant(Rational(value)); }
  static Expr real(double value);
  static Expr variable(std::string name);
  static Expr sum(std::vector<Expr> terms);
  static Expr product(std::vector<Expr> factors);
  static Expr power(Expr base, Rational exponent);
  static Expr exp(Expr argument);

  [[nodiscard]] Kind kind() const;
  [[nodiscard]] bool is_constant() const { return kind() == Kind::Constant; }
  [[nodiscard]] bool is_zero() const;
  [[nodiscard]] bool is_one() const;
  /// Value of a Constant node.
  [[nodiscard]] std::optional<double> constant_value() const;
  /// Exact value of a rational Constant node.
  [[nodiscard]] std::optional<Rational> exact_value() const;
  [[nodiscard]] const std::string& name() const;          // Variable
  [[nodiscard]] const std::vector<Expr>& children() const; // Sum, Product, Power (base), Exp (argument)
  [[nodiscard]] Rational exponent() const;                 // Power

  [[nodiscard]] std::string to_string() const;

  /// Number of nodes; used to keep derivative trees in check.
  [[nodiscard]] std::size_t size() const;

  friend Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b) { return product({a, b}); }
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

 private:
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const ExprNode> node_;
};

/// Variable bindings for evaluation.
using Env = std::map<std::string, double, std::less<>>;

struct EvalOptions {
  /// Allow negative bases under rational powers with odd denominators.
  bool odd_denominator = false;
};

/// Throws DomainError on an unbound variable or an invalid power.
[[nodiscard]] double evaluate(const Expr& e, const Env& env, EvalOptions options = {});
[[nodiscard]] double evaluate(const Expr& e, std::string_view var, double value, EvalOptions options = {});

/// Throws ParseError (with the offending position) on malformed text or a
/// non-rational exponent.
[[nodiscard]] Expr parse_expr(std::string_view text);

[[nodiscard]] Expr diff_expr(const Expr& e, std::string_view var);
[[nodiscard]] Expr diff_expr(const Expr& e, std::string_view var, unsigned order);

[[nodiscard]] Expr substitute(const Expr& e, std::string_view var, const Expr& replacement);

[[nodiscard]] std::set<std::string> free_variables(const Expr& e);

[[nodiscard]] inline std::string to_string(const Expr& e) { return e.to_string(); }

/// Shorthands.
[[nodiscard]] inline Expr pow(const Expr& base, Rational exponent) { return Expr::power(base, exponent); }
[[nodiscard]] inline Expr exp(const Expr& argument) { return Expr::exp(argument); }

}  // namespace superosc::numkit
