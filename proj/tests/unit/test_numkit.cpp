#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/hypergeometric_pFq.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "doctest.h"
#include "superosc/numkit/errors.hpp"
#include "superosc/numkit/expr.hpp"
#include "superosc/numkit/fd.hpp"
#include "superosc/numkit/ode.hpp"
#include "superosc/numkit/special.hpp"
#include "expr_corpus.hpp"
#include "test_support.hpp"

using namespace superosc;
using namespace superosc::numkit;
using superosc::test::five_point;
using superosc::test::random_corpus;

namespace {

// Plain defining series in long double, used as an independent oracle.
double series_oracle(double a, double b, double c, double z) {
  long double term = 1.0L, sum = 1.0L;
  for (int k = 0; k < 20000; ++k) {
    term *= (a + k) * (b + k) / ((c + k) * (k + 1.0L)) * static_cast<long double>(z);
    sum += term;
    if (std::fabs(static_cast<double>(term)) < 1e-20 * std::fabs(static_cast<double>(sum))) break;
  }
  return static_cast<double>(sum);
}

// Composite Simpson for 2/sqrt(pi) * int_0^x exp(-t^2) dt.
double erf_quadrature(double x) {
  const int n = 2000;
  const double h = x / n;
  double s = 1.0 + std::exp(-x * x);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * std::exp(-(i * h) * (i * h));
  return 2.0 / std::sqrt(std::numbers::pi) * s * h / 3.0;
}

OdeProblem oscillator_problem(double t1) {
  OdeProblem p;
  p.rhs = [](double, std::span<const double> y, std::span<double> d) {
    d[0] = y[1];
    d[1] = -y[0];
  };
  p.y0 = {1.0, 0.0};
  p.t1 = t1;
  return p;
}

}  // namespace

TEST_SUITE("ode") {
  TEST_CASE("harmonic oscillator reaches (-1, 0) at t = pi") {
    const auto traj = integrate_ode(oscillator_problem(std::numbers::pi));
    REQUIRE(traj.completed());
    const auto end = traj.state(traj.size() - 1);
    CHECK(std::abs(end[0] + 1.0) < 1e-8);
    CHECK(std::abs(end[1]) < 1e-8);
  }

  TEST_CASE("constant solution stays put") {
    OdeProblem p;
    p.rhs = [](double, std::span<const double>, std::span<double> d) { d[0] = 0.0; };
    p.y0 = {3.7};
    p.t1 = 12.5;
    const auto traj = integrate_ode(p);
    REQUIRE(traj.completed());
    CHECK(traj.state(traj.size() - 1)[0] == doctest::Approx(3.7).epsilon(1e-14));
  }

  TEST_CASE("energy drift on [0, 20] below 1e-8 at default tolerances") {
    const auto traj = integrate_ode(oscillator_problem(20.0));
    REQUIRE(traj.completed());
    double worst = 0.0;
    for (double t : traj.uniform_times(2001)) {
      const auto s = traj(t);
      worst = std::max(worst, std::abs(s[0] * s[0] + s[1] * s[1] - 1.0));
    }
    CHECK(worst < 1e-8);
  }

  TEST_CASE("dense output is exact at nodes and accurate between them") {
    const auto traj = integrate_ode(oscillator_problem(6.0));
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const auto s = traj(traj.times()[i]);
      CHECK(s[0] == traj.state(i)[0]);
      CHECK(s[1] == traj.state(i)[1]);
    }
    for (double t : traj.uniform_times(333)) CHECK(std::abs(traj(t)[0] - std::cos(t)) < 1e-8);
  }

  TEST_CASE("backward integration") {
    auto p = oscillator_problem(-2.0);
    const auto traj = integrate_ode(p);
    REQUIRE(traj.completed());
    CHECK(std::abs(traj.state(traj.size() - 1)[0] - std::cos(2.0)) < 1e-8);
  }

  TEST_CASE("invalid problems are rejected") {
    auto p = oscillator_problem(1.0);
    p.rtol = 1e-16;
    CHECK_THROWS_AS((void)integrate_ode(p), DomainError);
    p = oscillator_problem(0.0);
    CHECK_THROWS_AS((void)integrate_ode(p), DomainError);
    p = oscillator_problem(1.0);
    p.y0 = {std::nan(""), 0.0};
    CHECK_THROWS_AS((void)integrate_ode(p), DomainError);
  }

  TEST_CASE("finite-time blow-up returns a partial trajectory with a diagnostic") {
    OdeProblem p;
    p.rhs = [](double, std::span<const double> y, std::span<double> d) { d[0] = y[0] * y[0]; };
    p.y0 = {1.0};
    p.t1 = 2.0;
    const auto traj = integrate_ode(p);
    CHECK_FALSE(traj.completed());
    CHECK_FALSE(traj.diagnostic().empty());
    CHECK(traj.t_end() < 1.0);
    CHECK(traj.t_end() > 0.99);
  }
}

TEST_SUITE("hyp2f1") {
  TEST_CASE("trivial values") {
    CHECK(hyp2f1(0.3, 0.7, 1.9, 0.0) == 1.0);
    CHECK(hyp2f1(0.0, 0.7, 1.9, 0.95) == 1.0);
    // a = (n+3)/(2n+2) = 0 at n = -3.
    for (double z : {-50.0, -0.9, 0.3, 0.99, 7.0}) CHECK(hyp2f1(0.0, 1.0, 0.5, z) == 1.0);
  }

  TEST_CASE("logarithm identity") {
    CHECK(hyp2f1(1.0, 1.0, 2.0, 0.5) == doctest::Approx(1.3862943611198906).epsilon(1e-14));
    for (double z : {-5.0, -0.7, 0.2, 0.75, 0.95}) {
      CHECK(test::rel_err(hyp2f1(1.0, 1.0, 2.0, z), -std::log1p(-z) / z) < 1e-12);
    }
  }

  TEST_CASE("(1-z)^(-a) identity on [-0.9, 0.9]") {
    for (double a : {-2.5, -0.3, 0.5, 1.7, 3.2}) {
      for (double b : {0.4, 1.5, 2.25}) {
        for (int i = 0; i <= 36; ++i) {
          const double z = -0.9 + 0.05 * i;
          CHECK(test::rel_err(hyp2f1(a, b, b, z), std::pow(1.0 - z, -a)) < 1e-10);
        }
      }
    }
  }

  TEST_CASE("agrees with independent series and boost pFq oracles") {
    auto g = test::rng(5);
    for (int i = 0; i < 200; ++i) {
      const double a = test::uniform(g, -3.0, 3.0);
      const double b = test::uniform(g, -3.0, 3.0);
      const double c = test::uniform(g, 0.3, 4.0);
      const double z = test::uniform(g, -0.85, 0.85);
      const double ours = hyp2f1(a, b, c, z);
      CHECK(std::abs(ours - series_oracle(a, b, c, z)) <= 1e-11 * std::max(1.0, std::abs(ours)));
    }
    for (int i = 0; i < 100; ++i) {
      const double a = test::uniform(g, -2.0, 2.0);
      const double b = test::uniform(g, -2.0, 2.0);
      const double c = test::uniform(g, 0.3, 3.0) + 0.137;
      const double z = test::uniform(g, -0.97, 0.97);
      const double ref = boost::math::hypergeometric_pFq({a, b}, {c}, z);
      CHECK(std::abs(hyp2f1(a, b, c, z) - ref) <= 1e-9 * std::max(1.0, std::abs(ref)));
    }
  }

  TEST_CASE("connection formula near z = 1 with caller-supplied 1 - z") {
    // 2F1(a, 1; c; z) with c - a - b = -1/2, as used by the transcendental integral.
    const double a = 0.75, b = 1.0, c = 1.25;
    const double omz = 1e-10;
    const double z = 1.0 - omz;
    const double ref = boost::math::hypergeometric_pFq({a, b}, {c}, 0.999);
    CHECK(test::rel_err(hyp2f1(a, b, c, 0.999), ref) < 1e-9);
    const double v = hyp2f1(a, b, c, z, omz);
    CHECK(std::isfinite(v));
    // Leading singular term: Gamma(c) Gamma(a+b-c) / (Gamma(a) Gamma(b)) (1-z)^{c-a-b}.
    const double lead = std::tgamma(c) * std::tgamma(a + b - c) / (std::tgamma(a) * std::tgamma(b));
    CHECK(v * std::sqrt(omz) == doctest::Approx(lead).epsilon(1e-4));
  }

  TEST_CASE("terminating series accepts any z") {
    // 2F1(-2, b; c; z) = 1 - 2 b z / c + b (b+1) z^2 / (c (c+1)).
    const double b = 1.0, c = -0.5 + 0.0;
    for (double z : {-10.0, 0.5, 3.0}) {
      const double ref = 1.0 - 2.0 * b * z / c + b * (b + 1.0) * z * z / (c * (c + 1.0));
      CHECK(test::rel_err(hyp2f1(-2.0, b, c, z), ref) < 1e-14);
    }
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS((void)hyp2f1(0.5, 1.0, -2.0, 0.3), DomainError);
    CHECK_THROWS_AS((void)hyp2f1(0.5, 1.0, 1.5, 1.0), BranchError);
    CHECK_THROWS_AS((void)hyp2f1(0.5, 1.0, 1.5, 2.5), BranchError);
    // pole in c is harmless when the series stops first
    CHECK(std::isfinite(hyp2f1(-1.0, 1.0, -3.0, 0.4)));
  }
}

TEST_SUITE("special") {
  TEST_CASE("erf") {
    CHECK(erf_fn(0.0) == 0.0);
    auto g = test::rng(9);
    for (int i = 0; i < 50; ++i) {
      const double x = test::uniform(g, -6.0, 6.0);
      CHECK(erf_fn(x) == -erf_fn(-x));
      CHECK(std::abs(erf_fn(x)) < 1.0 + 0.0);
    }
    CHECK(std::abs(erf_fn(1.0) - erf_quadrature(1.0)) < 1e-12);
    CHECK(erf_fn(1.0) == doctest::Approx(0.842700792949715).epsilon(1e-13));
    for (double x : {0.1, 0.5, 2.0, 3.0}) CHECK(std::abs(erf_fn(x) - erf_quadrature(x)) < 1e-12);
  }

  TEST_CASE("pochhammer and binomial") {
    CHECK(pochhammer(0.5, 0) == 1.0);
    CHECK(pochhammer(-1.5, 2) == doctest::Approx(0.75));
    CHECK(binomial(5, 2) == 10.0);
    CHECK(binomial(2, 3) == 0.0);
  }

  TEST_CASE("real powers") {
    CHECK(real_power(4.0, 0.5) == 2.0);
    CHECK(real_power(-2.0, 3.0) == -8.0);
    CHECK_THROWS_AS((void)real_power(-8.0, 1.0 / 3.0), DomainError);
    CHECK(real_power(-8.0, 1.0 / 3.0, true) == doctest::Approx(-2.0));
    CHECK(real_power(-8.0, -2.0 / 3.0, true) == doctest::Approx(0.25));
    CHECK_THROWS_AS((void)real_power(-4.0, 0.5, true), DomainError);
    CHECK_THROWS_AS((void)real_power(0.0, -1.0), DomainError);
  }

  TEST_CASE("rational recovery") {
    CHECK(rational_from_double(-5.0 / 3.0) == Rational(-5, 3));
    CHECK(rational_from_double(-7.0 / 5.0) == Rational(-7, 5));
    CHECK_THROWS_AS((void)rational_from_double(std::numbers::pi), DomainError);
  }
}

TEST_SUITE("expr") {
  TEST_CASE("parse examples") {
    CHECK(evaluate(parse_expr("2*w^(1/2)"), "w", 4.0) == 4.0);
    CHECK(evaluate(parse_expr("w^(-2/3) + 1"), "w", 1.0) == 2.0);
    CHECK(evaluate(parse_expr("exp(2*w)"), "w", 0.0) == 1.0);
    CHECK(evaluate(parse_expr("-w^2 - 3/w"), "w", 1.0) == -4.0);
    CHECK(evaluate(parse_expr("2.5e-1*w"), "w", 4.0) == 1.0);
    CHECK(evaluate(parse_expr("w^-1"), "w", 4.0) == 0.25);
  }

  TEST_CASE("exponents stay exact") {
    const Expr e = parse_expr("(w^(2/3))^3");
    REQUIRE(e.kind() == Expr::Kind::Power);
    CHECK(e.exponent() == Rational(2));
    CHECK(diff_expr(parse_expr("w^(-2/3)"), "w").to_string().find("-5/3") != std::string::npos);
  }

  TEST_CASE("parse errors carry positions") {
    try {
      (void)parse_expr("w + * 2");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.position() == 4);
    }
    CHECK_THROWS_AS((void)parse_expr("w^(0.5)"), ParseError);
    CHECK_THROWS_AS((void)parse_expr("w^0.5"), ParseError);
    CHECK_THROWS_AS((void)parse_expr("(w + 1"), ParseError);
    CHECK_THROWS_AS((void)parse_expr(""), ParseError);
    CHECK_THROWS_AS((void)parse_expr("w^(1/0)"), ParseError);
  }

  TEST_CASE("evaluation domain") {
    CHECK_THROWS_AS((void)evaluate(parse_expr("w^(1/3)"), "w", -8.0), DomainError);
    CHECK(evaluate(parse_expr("w^(1/3)"), "w", -8.0, {true}) == doctest::Approx(-2.0));
    CHECK_THROWS_AS((void)evaluate(parse_expr("w + v"), "w", 1.0), DomainError);
  }

  TEST_CASE("derivative examples") {
    const Expr d = diff_expr(parse_expr("w^2 + 3"), "w");
    for (double w : {-1.0, 0.5, 2.0}) CHECK(evaluate(d, "w", w) == 2.0 * w);
    CHECK(evaluate(diff_expr(parse_expr("w^(-2/3)"), "w"), "w", 1.0) == doctest::Approx(-2.0 / 3.0));
    CHECK(diff_expr(parse_expr("7"), "w").is_zero());
  }

  TEST_CASE("fourth derivative of a Van der Pol type M against finite differences") {
    // M = 1 + 3 mu (m+1) / (2 (m+2) w^m), m = 2, mu = 1.
    const Expr M = parse_expr("1 + 9/8*w^(-2)");
    const Expr d3 = diff_expr(M, "w", 3);
    const Expr d4 = diff_expr(M, "w", 4);
    const double fd = fd_derivative([&](double w) { return evaluate(d3, "w", w); }, 1.0, 1e-4);
    CHECK(test::rel_err(evaluate(d4, "w", 1.0), fd) < 1e-5);
    CHECK(evaluate(d4, "w", 1.0) == doctest::Approx(9.0 / 8.0 * 120.0));
  }

  TEST_CASE("print/parse round trip and derivative vs FD on random corpus") {
    const auto corpus = random_corpus(100);
    auto g = test::rng(31);
    for (const auto& e : corpus) {
      const Expr back = parse_expr(e.to_string());
      const Expr back2 = parse_expr(back.to_string());
      const Expr d = diff_expr(e, "w");
      for (int j = 0; j < 3; ++j) {
        const double w = test::uniform(g, 0.5, 2.0);
        const double v = evaluate(e, "w", w);
        CHECK(test::rel_err(evaluate(back, "w", w), v) < 1e-12);
        CHECK(test::rel_err(evaluate(back2, "w", w), v) < 1e-12);
        const double fd = five_point([&](double t) { return evaluate(e, "w", t); }, w, 1e-3);
        const double an = evaluate(d, "w", w);
        if (std::abs(an) > 1e-6) CHECK(std::abs(an - fd) / std::abs(an) < 1e-6);
      }
    }
  }

  TEST_CASE("substitution and free variables") {
    const Expr e = parse_expr("x^2 + y*exp(x)");
    CHECK(free_variables(e) == std::set<std::string>{"x", "y"});
    const Expr s = substitute(e, "x", parse_expr("2*t"));
    CHECK(evaluate(s, Env{{"t", 0.5}, {"y", 3.0}}) == doctest::Approx(1.0 + 3.0 * std::exp(1.0)));
  }
}

TEST_SUITE("fd") {
  TEST_CASE("gradient of a sum is all ones") {
    const std::vector<double> p{0.3, -2.0, 5.0};
    const auto gr = fd_gradient([](std::span<const double> x) { return x[0] + x[1] + x[2]; }, p);
    for (double v : gr) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("quadratic form") {
    const std::vector<double> p{0.7, -1.2};
    const auto f = [](std::span<const double> x) { return 3 * x[0] * x[0] + 2 * x[0] * x[1] + 5 * x[1] * x[1]; };
    const auto gr = fd_gradient(f, p);
    CHECK(test::rel_err(gr[0], 6 * 0.7 + 2 * -1.2) < 1e-8);
    CHECK(test::rel_err(gr[1], 2 * 0.7 + 10 * -1.2) < 1e-8);
  }

  TEST_CASE("quartic-example Hamiltonian partials at (0, 1, 1, 1)") {
    const auto H = [](std::span<const double> s) {
      return s[2] * s[2] / std::cbrt(s[1] * s[1]) + 2 * s[3] * s[3] / std::pow(s[1], 4.0 / 3.0);
    };
    const std::vector<double> p{0.0, 1.0, 1.0, 1.0};
    const auto gr = fd_gradient(H, p);
    CHECK(std::abs(gr[0]) < 1e-12);
    CHECK(test::rel_err(gr[1], -10.0 / 3.0) < 1e-6);
    CHECK(test::rel_err(gr[2], 2.0) < 1e-6);
    CHECK(test::rel_err(gr[3], 4.0) < 1e-6);
  }

  TEST_CASE("step range and non-finite samples") {
    const std::vector<double> p{1.0};
    const auto f = [](std::span<const double> x) { return x[0]; };
    CHECK_THROWS_AS((void)fd_gradient(f, p, 1e-2), DomainError);
    CHECK_THROWS_AS((void)fd_gradient([](std::span<const double> x) { return std::log(x[0] - 1.0); }, p),
                    NumericalError);
  }
}
