#include <cmath>

#include "doctest.h"
#include "superosc/lienard.hpp"
#include "superosc/numkit/errors.hpp"
#include "test_support.hpp"

using namespace superosc;
using superosc::numkit::Rational;
using superosc::test::uniform;

namespace {

LienardState random_ic(std::mt19937_64& g, double w_lo, double w_hi, double v_abs) {
  return {0.0, uniform(g, w_lo, w_hi), uniform(g, -v_abs, v_abs)};
}

void check_family(const LienardFamily& fam, double w_lo, double w_hi, double v_abs, double res_tol) {
  auto g = test::rng();
  for (int i = 0; i < 5; ++i) {
    const auto s0 = random_ic(g, w_lo, w_hi, v_abs);
    CAPTURE(s0.w);
    CAPTURE(s0.w_xi);
    const auto r = verify_equivalence(fam, s0, 5.0);
    REQUIRE(r.completed);
    CHECK(r.max_residual < res_tol);
    CHECK(r.min_abs_jacobian > 0.0);
    REQUIRE(r.J1_drift.has_value());
    CHECK(*r.J1_drift < 1e-6);
    REQUIRE(r.J2_drift.has_value());
    CHECK(*r.J2_drift < 1e-5);
  }
}

}  // namespace

TEST_CASE("lienard: Duffing coefficients and exclusions") {
  const auto spec = duffing(3, 1, 1);
  // g = 2*4/36 w + w^3
  CHECK(spec.g_at(2.0) == doctest::Approx(8.0 / 36.0 * 2.0 + 8.0).epsilon(1e-15));
  CHECK(spec.f_at(0.7) == doctest::Approx(1.0));
  for (double n : {-3.0, -1.0, 0.0, 1.0}) CHECK_THROWS_AS((void)caseII_family(n, 1, 1), DomainError);
  CHECK_THROWS_AS((void)caseII_family(3, 0, 1), DomainError);
  CHECK_THROWS_AS((void)caseIII_family(0), DomainError);
  CHECK_THROWS_AS((void)dvdp_example(-2, 1), DomainError);
  CHECK_THROWS_AS((void)dvdp_example(-1.0 / 3.0, 1), DomainError);
}

TEST_CASE("lienard: chain-rule residual vanishes pointwise for case II and III") {
  auto g = test::rng(7);
  const auto d3 = caseII_family(3, 1, 1);
  const auto c3 = caseIII_family(1);
  const auto d2 = caseII_family(2, 0.5, -1);
  for (int i = 0; i < 50; ++i) {
    const LienardState s{uniform(g, -1, 1), uniform(g, 0.2, 2), uniform(g, -1, 1)};
    for (const auto* fam : {&d3, &c3, &d2}) {
      CAPTURE(fam->spec.family);
      CHECK(std::abs(equivalence_residual(*fam, s)) <
            1e-9 * std::max(1.0, std::abs(acceleration(fam->osc, fam->map.at(s.xi, s.w).F))));
    }
  }
}

TEST_CASE("lienard: wrong map is detected") {
  auto fam = caseII_family(3, 1, 1);
  const auto other = caseII_family(3, 2, 1);
  fam.map = other.map;
  CHECK(std::abs(equivalence_residual(fam, {0.1, 0.7, 0.2})) > 1e-3);
}

TEST_CASE("lienard: Duffing n = 3 trajectories") { check_family(caseII_family(3, 1, 1), 0.3, 0.8, 0.5, 1e-6); }

TEST_CASE("lienard: case III trajectories") { check_family(caseIII_family(1), 0.5, 1.0, 0.3, 1e-6); }

TEST_CASE("lienard: case II with other exponents") {
  check_family(caseII_family(2, 1, 1), 0.3, 0.8, 0.3, 1e-6);
  check_family(caseII_family(5, 1, 1), 0.3, 0.8, 0.3, 1e-6);
  // n + 1 < 0 with an even-denominator exponent has no real scale factor.
  CHECK_THROWS_AS((void)caseII_family(-5.0 / 3.0, 1, 1), DomainError);
}

TEST_CASE("lienard: Duffing-Van der Pol example") {
  const auto fam = dvdp_example(2, 1);
  CHECK(fam.osc.n == doctest::Approx(-1.0 / 7.0));
  CHECK(fam.osc.delta == -1.0);
  // g = 2/27 w^5 + 1/4 w^3 + 3/16 w
  CHECK(fam.spec.g_at(1.3) == doctest::Approx(2.0 / 27 * std::pow(1.3, 5) + 0.25 * std::pow(1.3, 3) + 3.0 / 16 * 1.3));
  auto g = test::rng(3);
  for (int i = 0; i < 5; ++i) {
    const auto s0 = random_ic(g, 0.5, 1.0, 0.3);
    const auto r = verify_equivalence(fam, s0, 5.0);
    REQUIRE(r.completed);
    CHECK(r.max_residual < 1e-5);
    REQUIRE(r.J1_drift.has_value());
    CHECK(*r.J1_drift < 1e-6);
  }
}

TEST_CASE("lienard: m = 1 coefficients") {
  const auto fam = dvdp_example(1, 0.5);
  const double w = 0.8, mu = 0.5;
  CHECK(fam.spec.f_at(w) == doctest::Approx(w + mu));
  CHECK(fam.spec.g_at(w) == doctest::Approx(w * w * w / 9 + mu * w * w / 3 + 2 * mu * mu * w / 9));
  CHECK(fam.osc.n == 0.0);
  const auto r = verify_equivalence(fam, {0.0, 0.7, 0.1}, 3.0);
  REQUIRE(r.completed);
  CHECK(r.max_residual < 1e-6);
  CHECK_FALSE(r.J1_drift.has_value());
}

TEST_CASE("lienard: M-family reproduces the example") {
  for (double m : {2.0, 3.0}) {
    const double mu = 1.0;
    const double n = (1 - m) / (3 * m + 1);
    const auto ex = dvdp_example(m, mu);
    const auto fam = caseI_family(dvdp_M(m, mu), dvdp_C1(m, mu), n, -1.0);
    for (double w : {0.4, 0.9, 1.7}) {
      CAPTURE(m);
      CAPTURE(w);
      CHECK(fam.spec.f_at(w) == doctest::Approx(ex.spec.f_at(w)).epsilon(1e-12));
      CHECK(fam.spec.g_at(w) == doctest::Approx(ex.spec.g_at(w)).epsilon(1e-12));
      for (double xi : {-0.5, 0.0, 0.8}) {
        const auto a = fam.map.at(xi, w);
        const auto b = ex.map.at(xi, w);
        CHECK(a.F == doctest::Approx(b.F).epsilon(1e-10));
        CHECK(a.G == doctest::Approx(b.G).epsilon(1e-12));
        CHECK(std::abs(equivalence_residual(fam, {xi, w, 0.3})) < 1e-8);
      }
    }
  }
}

TEST_CASE("lienard: printed radicand of F does not match") {
  const double m = 2, mu = 1, n = -1.0 / 7.0;
  const auto M = dvdp_M(m, mu);
  const auto fam = caseI_family(M, dvdp_C1(m, mu), n, -1.0);
  const double xi = 0.3, w = 0.9;
  const double corrected = std::pow(fam.map.at(xi, w).F, n - 1);
  const double printed = caseI_printed_radicand(M, dvdp_C1(m, mu), n, -1.0, xi, w);
  CHECK(std::abs(printed - corrected) > 1e-2 * std::abs(corrected));
}

TEST_CASE("lienard: M equation as printed vs homogeneous variant") {
  const auto M = dvdp_M(2, 1);
  const double n = -1.0 / 7.0;
  double printed = 0.0, homogeneous = 0.0;
  for (double w : {0.5, 0.9, 1.4}) {
    printed = std::max(printed, std::abs(m_equation_residual(M, n, w)));
    homogeneous = std::max(homogeneous, std::abs(m_equation_residual_homogeneous(M, n, w)));
  }
  MESSAGE("printed " << printed << " homogeneous " << homogeneous);
  CHECK(printed > 1e-3);
  // Rounding-level relative to the size of the individual terms.
  CHECK(homogeneous < 1e-12 * printed);
  // Linear M kills every term.
  const auto lin = numkit::parse_expr("2*w+1");
  CHECK(m_equation_residual(lin, 3, 0.7) == doctest::Approx(0.0));
}

TEST_CASE("lienard: Duffing shift identity is exact") {
  for (auto [a, d] : {std::pair{Rational(1), Rational(1)}, std::pair{Rational(3, 2), Rational(-2)},
                      std::pair{Rational(-5), Rational(7, 3)}}) {
    const auto sh = duffing_shift(a, d);
    CHECK(sh.exact_match());
    CHECK(sh.shifted[0] == Rational(0));
    const auto target = duffing(2, numkit::to_double(a), numkit::to_double(d));
    const double w = 0.37, s = numkit::to_double(sh.shift);
    CHECK(sh.spec.g_at(w + s) == doctest::Approx(target.g_at(w)).epsilon(1e-13));
  }
}

TEST_CASE("lienard: eliminating xi leaves a constant") {
  const auto fam = caseII_family(3, 1, 1);
  const auto r = autonomy_recovery(fam, {0.0, 0.6, 0.1}, 5.0, -3.0, 8.0);
  MESSAGE("unresolved " << r.unresolved << " of " << r.samples);
  CHECK(r.unresolved < r.samples / 2);
  CHECK(r.max_xi_error < 1e-6);
  CHECK(r.drift < 1e-5);
}
