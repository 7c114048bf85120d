#include "superosc/numkit/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>

#include "superosc/numkit/errors.hpp"
#include "superosc/numkit/special.hpp"

namespace superosc::numkit {

struct ExprNode {
  Expr::Kind kind = Expr::Kind::Constant;
  bool exact = true;
  Rational rational{0};
  double real = 0.0;
  std::string name;
  std::vector<Expr> children;
  Rational exponent{1};
};

namespace {

constexpr long long kExactLimit = 1LL << 40;

// Exact arithmetic that gives up (returns nullopt) before overflowing.
bool fits(double magnitude) { return magnitude < 4.0e18; }

std::optional<Rational> bounded(const Rational& r) {
  if (std::abs(r.numerator()) > kExactLimit || r.denominator() > kExactLimit) return std::nullopt;
  return r;
}

std::optional<Rational> checked_mul(const Rational& a, const Rational& b) {
  const double n = std::abs(static_cast<double>(a.numerator()) * static_cast<double>(b.numerator()));
  const double d = static_cast<double>(a.denominator()) * static_cast<double>(b.denominator());
  if (!fits(n) || !fits(d)) return std::nullopt;
  return bounded(a * b);
}

std::optional<Rational> checked_add(const Rational& a, const Rational& b) {
  const double n = std::abs(static_cast<double>(a.numerator()) * static_cast<double>(b.denominator())) +
                   std::abs(static_cast<double>(b.numerator()) * static_cast<double>(a.denominator()));
  const double d = static_cast<double>(a.denominator()) * static_cast<double>(b.denominator());
  if (!fits(n) || !fits(d)) return std::nullopt;
  return bounded(a + b);
}

// Folded constant: exact while possible, double afterwards.
struct Acc {
  bool exact = true;
  Rational q;
  double d = 0.0;

  explicit Acc(long long v) : q(v), d(static_cast<double>(v)) {}

  void add(const ExprNode& c) {
    if (exact && c.exact) {
      if (auto r = checked_add(q, c.rational)) {
        q = *r;
        d = to_double(q);
        return;
      }
    }
    d = (exact ? to_double(q) : d) + (c.exact ? to_double(c.rational) : c.real);
    exact = false;
  }
  void mul(const ExprNode& c) {
    if (exact && c.exact) {
      if (auto r = checked_mul(q, c.rational)) {
        q = *r;
        d = to_double(q);
        return;
      }
    }
    d = (exact ? to_double(q) : d) * (c.exact ? to_double(c.rational) : c.real);
    exact = false;
  }
  [[nodiscard]] Expr expr() const { return exact ? Expr::constant(q) : Expr::real(d); }
  [[nodiscard]] bool is_zero() const { return exact ? q == Rational(0) : d == 0.0; }
  [[nodiscard]] bool is_one() const { return exact ? q == Rational(1) : d == 1.0; }
};

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool is_negative_constant(const Expr& e) {
  auto v = e.constant_value();
  return v && *v < 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction

Expr::Expr() : node_(std::make_shared<ExprNode>()) {}

Expr Expr::constant(Rational value) {
  auto n = std::make_shared<ExprNode>();
  n->kind = Kind::Constant;
  n->exact = true;
  n->rational = value;
  n->real = to_double(value);
  return Expr(std::move(n));
}

Expr Expr::real(double value) {
  if (!std::isfinite(value)) throw DomainError("Expr::real: non-finite constant");
  auto n = std::make_shared<ExprNode>();
  n->kind = Kind::Constant;
  n->exact = false;
  n->real = value;
  return Expr(std::move(n));
}

Expr Expr::variable(std::string name) {
  auto n = std::make_shared<ExprNode>();
  n->kind = Kind::Variable;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::sum(std::vector<Expr> terms) {
  Acc constant(0);
  std::vector<Expr> rest;
  std::function<void(const Expr&)> absorb = [&](const Expr& t) {
    if (t.kind() == Kind::Sum) {
      for (const auto& c : t.children()) absorb(c);
    } else if (t.kind() == Kind::Constant) {
      constant.add(*t.node_);
    } else {
      rest.push_back(t);
    }
  };
  for (const auto& t : terms) absorb(t);
  if (!constant.is_zero()) rest.insert(rest.begin(), constant.expr());
  if (rest.empty()) return constant.expr();
  if (rest.size() == 1) return rest.front();
  auto n = std::make_shared<ExprNode>();
  n->kind = Kind::Sum;
  n->children = std::move(rest);
  return Expr(std::move(n));
}

Expr Expr::product(std::vector<Expr> factors) {
  Acc constant(1);
  std::vector<Expr> rest;
  std::function<void(const Expr&)> absorb = [&](const Expr& f) {
    if (f.kind() == Kind::Product) {
      for (const auto& c : f.children()) absorb(c);
    } else if (f.kind() == Kind::Constant) {
      constant.mul(*f.node_);
    } else {
      rest.push_back(f);
    }
  };
  for (const auto& f : factors) absorb(f);
  if (constant.is_zero()) return constant.expr();
  if (!constant.is_one()) rest.insert(rest.begin(), constant.expr());
  if (rest.empty()) return constant.expr();
  if (rest.size() == 1) return rest.front();
  auto n = std::make_shared<ExprNode>();
  n->kind = Kind::Product;
  n->children = std::move(rest);
  return Expr(std::move(n));
}

Expr Expr::power(Expr base, Rational exponent) {
  if (exponent == Rational(0)) return constant(1);
  if (exponent == Rational(1)) return base;
  if (base.kind() == Kind::Constant) {
    const ExprNode& b = *base.node_;
    if (b.exact && exponent.denominator() == 1 && std::abs(exponent.numerator()) <= 64) {
      if (b.rational == Rational(0) && exponent < Rational(0)) throw DomainError("Expr::power: zero raised to a negative power");
      std::optional<Rational> r = Rational(1);
      Rational factor = exponent > Rational(0) ? b.rational : Rational(1) / b.rational;
      for (long long i = 0; i < std::abs(exponent.numerator()) && r; ++i) r = checked_mul(*r, factor);
      if (r) return constant(*r);
    }
    const double bv = b.exact ? to_double(b.rational) : b.real;
    if (bv > 0.0 || exponent.denominator() == 1) return real(real_power(bv, to_double(exponent)));
  }
  if (base.kind() == Kind::Power && exponent.denominator() == 1) {
    // (b^r)^k = b^{rk} holds for integer k wherever the left side is defined.
    return power(base.children().front(), base.exponent() * exponent);
  }
  auto n = std::make_shared<ExprNode>();
  n->kind = Kind::Power;
  n->children = {std::move(base)};
  n->exponent = exponent;
  return Expr(std::move(n));
}

Expr Expr::exp(Expr argument) {
  if (argument.is_zero()) return constant(1);
  auto n = std::make_shared<ExprNode>();
  n->kind = Kind::Exp;
  n->children = {std::move(argument)};
  return Expr(std::move(n));
}

Expr operator-(const Expr& a, const Expr& b) { return Expr::sum({a, Expr::product({Expr::constant(-1), b})}); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::product({a, Expr::power(b, Rational(-1))}); }
Expr operator-(const Expr& a) { return Expr::product({Expr::constant(-1), a}); }

// ---------------------------------------------------------------------------
// Accessors

Expr::Kind Expr::kind() const { return node_->kind; }

bool Expr::is_zero() const {
  auto v = constant_value();
  return v && *v == 0.0;
}

bool Expr::is_one() const {
  auto v = constant_value();
  return v && *v == 1.0;
}

std::optional<double> Expr::constant_value() const {
  if (node_->kind != Kind::Constant) return std::nullopt;
  return node_->exact ? to_double(node_->rational) : node_->real;
}

std::optional<Rational> Expr::exact_value() const {
  if (node_->kind != Kind::Constant || !node_->exact) return std::nullopt;
  return node_->rational;
}

const std::string& Expr::name() const { return node_->name; }
const std::vector<Expr>& Expr::children() const { return node_->children; }
Rational Expr::exponent() const { return node_->exponent; }

std::size_t Expr::size() const {
  std::size_t s = 1;
  for (const auto& c : node_->children) s += c.size();
  return s;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string print(const Expr& e);

std::string print_constant(const Expr& e) {
  if (auto q = e.exact_value()) {
    const std::string body = to_string(*q);
    if (*q < Rational(0) || q->denominator() != 1) return "(" + body + ")";
    return body;
  }
  const double v = *e.constant_value();
  const std::string body = format_real(v);
  return v < 0.0 ? "(" + body + ")" : body;
}

// Operand of '*' or base of '^'.
std::string print_operand(const Expr& e, bool as_base) {
  switch (e.kind()) {
    case Expr::Kind::Sum:
      return "(" + print(e) + ")";
    case Expr::Kind::Product:
    case Expr::Kind::Power:
      return as_base ? "(" + print(e) + ")" : print(e);
    default:
      return print(e);
  }
}

std::string print(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Constant:
      return print_constant(e);
    case Expr::Kind::Variable:
      return e.name();
    case Expr::Kind::Sum: {
      std::string out;
      bool first = true;
      for (const auto& t : e.children()) {
        // Pull a leading negative coefficient out as a binary minus.
        const bool negated = (t.kind() == Expr::Kind::Product && is_negative_constant(t.children().front())) ||
                             is_negative_constant(t);
        if (!first && negated) {
          const Expr pos = -t;
          out += " - " + (pos.kind() == Expr::Kind::Sum ? "(" + print(pos) + ")" : print(pos));
        } else {
          out += (first ? "" : " + ") + print(t);
        }
        first = false;
      }
      return out;
    }
    case Expr::Kind::Product: {
      std::string out;
      bool first = true;
      for (const auto& f : e.children()) {
        out += (first ? "" : "*") + print_operand(f, false);
        first = false;
      }
      return out;
    }
    case Expr::Kind::Power: {
      const Rational r = e.exponent();
      const std::string ex = (r.denominator() == 1 && r > Rational(0)) ? to_string(r) : "(" + to_string(r) + ")";
      return print_operand(e.children().front(), true) + "^" + ex;
    }
    case Expr::Kind::Exp:
      return "exp(" + print(e.children().front()) + ")";
  }
  return {};
}

}  // namespace

std::string Expr::to_string() const { return print(*this); }

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double eval(const Expr& e, const Env& env, const EvalOptions& opt) {
  switch (e.kind()) {
    case Expr::Kind::Constant:
      return *e.constant_value();
    case Expr::Kind::Variable: {
      auto it = env.find(e.name());
      if (it == env.end()) throw DomainError("evaluate: unbound variable '" + e.name() + "'");
      return it->second;
    }
    case Expr::Kind::Sum: {
      double s = 0.0;
      for (const auto& c : e.children()) s += eval(c, env, opt);
      return s;
    }
    case Expr::Kind::Product: {
      double p = 1.0;
      for (const auto& c : e.children()) p *= eval(c, env, opt);
      return p;
    }
    case Expr::Kind::Power: {
      const double b = eval(e.children().front(), env, opt);
      const Rational r = e.exponent();
      if (b < 0.0 && r.denominator() != 1) {
        if (!opt.odd_denominator || r.denominator() % 2 == 0) {
          std::ostringstream msg;
          msg << "evaluate: negative base " << b << " under exponent " << numkit::to_string(r);
          throw DomainError(msg.str());
        }
        const double mag = std::pow(-b, to_double(r));
        return r.numerator() % 2 != 0 ? -mag : mag;
      }
      if (b == 0.0 && r < Rational(0)) throw DomainError("evaluate: zero raised to a negative power");
      if (r.denominator() == 1) return std::pow(b, static_cast<double>(r.numerator()));
      return std::pow(b, to_double(r));
    }
    case Expr::Kind::Exp:
      return std::exp(eval(e.children().front(), env, opt));
  }
  return 0.0;
}

}  // namespace

double evaluate(const Expr& e, const Env& env, EvalOptions options) { return eval(e, env, options); }

double evaluate(const Expr& e, std::string_view var, double value, EvalOptions options) {
  Env env;
  env.emplace(std::string(var), value);
  return eval(e, env, options);
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Expr parse() {
    Expr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expr expr() {
    std::vector<Expr> terms;
    if (accept('-')) {
      terms.push_back(-term());
    } else {
      accept('+');
      terms.push_back(term());
    }
    while (true) {
      if (accept('+')) {
        terms.push_back(term());
      } else if (accept('-')) {
        terms.push_back(-term());
      } else {
        break;
      }
    }
    return Expr::sum(std::move(terms));
  }

  Expr term() {
    std::vector<Expr> factors{unary()};
    while (true) {
      if (accept('*')) {
        factors.push_back(unary());
      } else if (accept('/')) {
        factors.push_back(Expr::power(unary(), Rational(-1)));
      } else {
        break;
      }
    }
    return Expr::product(std::move(factors));
  }

  Expr unary() {
    if (accept('-')) return -unary();
    return factor();
  }

  Expr factor() {
    Expr b = base();
    if (accept('^')) return Expr::power(b, exponent());
    return b;
  }

  long long integer(bool allow_sign) {
    skip();
    const std::size_t start = pos_;
    bool neg = false;
    if (allow_sign && pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
      neg = s_[pos_] == '-';
      ++pos_;
      skip();
    }
    const std::size_t digits = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ == digits) {
      pos_ = start;
      fail("expected an integer");
    }
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s_.data() + digits, s_.data() + pos_, v);
    if (ec != std::errc()) {
      pos_ = start;
      fail("integer out of range");
    }
    (void)ptr;
    return neg ? -v : v;
  }

  Rational exponent() {
    skip();
    if (accept('(')) {
      const std::size_t at = pos_;
      long long num = integer(true);
      long long den = 1;
      if (accept('/')) den = integer(false);
      if (!peek(')')) {
        pos_ = at;
        fail("exponent is not a rational number");
      }
      expect(')');
      if (den == 0) fail("zero denominator in exponent");
      return Rational(num, den);
    }
    if (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '-')) {
      const std::size_t at = pos_;
      long long v = integer(true);
      if (pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E')) {
        pos_ = at;
        fail("exponent is not a rational number");
      }
      return Rational(v);
    }
    fail("expected an exponent");
  }

  Expr number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    bool real = false;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      real = true;
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
      if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
        real = true;
        pos_ = p;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
    }
    const std::string_view tok = s_.substr(start, pos_ - start);
    if (!real) {
      long long v = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      (void)ptr;
      if (ec == std::errc()) return Expr::constant(v);
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    (void)ptr;
    if (ec != std::errc()) {
      pos_ = start;
      fail("malformed number");
    }
    return Expr::real(v);
  }

  Expr base() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (accept('(')) {
      Expr e = expr();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      std::string ident(s_.substr(start, pos_ - start));
      if (ident == "exp" && peek('(')) {
        expect('(');
        Expr arg = expr();
        expect(')');
        return Expr::exp(arg);
      }
      return Expr::variable(std::move(ident));
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text) { return Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Calculus and substitution

Expr diff_expr(const Expr& e, std::string_view var) {
  switch (e.kind()) {
    case Expr::Kind::Constant:
      return Expr::constant(0);
    case Expr::Kind::Variable:
      return Expr::constant(e.name() == var ? 1 : 0);
    case Expr::Kind::Sum: {
      std::vector<Expr> terms;
      for (const auto& c : e.children()) terms.push_back(diff_expr(c, var));
      return Expr::sum(std::move(terms));
    }
    case Expr::Kind::Product: {
      const auto& fs = e.children();
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < fs.size(); ++i) {
        Expr di = diff_expr(fs[i], var);
        if (di.is_zero()) continue;
        std::vector<Expr> prod;
        prod.reserve(fs.size());
        for (std::size_t j = 0; j < fs.size(); ++j) prod.push_back(j == i ? di : fs[j]);
        terms.push_back(Expr::product(std::move(prod)));
      }
      return Expr::sum(std::move(terms));
    }
    case Expr::Kind::Power: {
      const Expr& b = e.children().front();
      Expr db = diff_expr(b, var);
      if (db.is_zero()) return Expr::constant(0);
      const Rational r = e.exponent();
      return Expr::product({Expr::constant(r), Expr::power(b, r - 1), db});
    }
    case Expr::Kind::Exp: {
      Expr da = diff_expr(e.children().front(), var);
      if (da.is_zero()) return Expr::constant(0);
      return Expr::product({e, da});
    }
  }
  return Expr::constant(0);
}

Expr diff_expr(const Expr& e, std::string_view var, unsigned order) {
  Expr d = e;
  for (unsigned i = 0; i < order; ++i) d = diff_expr(d, var);
  return d;
}

Expr substitute(const Expr& e, std::string_view var, const Expr& replacement) {
  switch (e.kind()) {
    case Expr::Kind::Constant:
      return e;
    case Expr::Kind::Variable:
      return e.name() == var ? replacement : e;
    case Expr::Kind::Sum:
    case Expr::Kind::Product: {
      std::vector<Expr> cs;
      for (const auto& c : e.children()) cs.push_back(substitute(c, var, replacement));
      return e.kind() == Expr::Kind::Sum ? Expr::sum(std::move(cs)) : Expr::product(std::move(cs));
    }
    case Expr::Kind::Power:
      return Expr::power(substitute(e.children().front(), var, replacement), e.exponent());
    case Expr::Kind::Exp:
      return Expr::exp(substitute(e.children().front(), var, replacement));
  }
  return e;
}

std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  std::function<void(const Expr&)> walk = [&](const Expr& x) {
    if (x.kind() == Expr::Kind::Variable) out.insert(x.name());
    for (const auto& c : x.children()) walk(c);
  };
  walk(e);
  return out;
}

}  // namespace superosc::numkit
