#pragma once

/**
 * @file lienard.hpp
 * @brief Lienard equations w'' + f(w) w' + g(w) = 0 that are point-equivalent
 * to the anharmonic oscillator via y = F(xi, w), x = G(xi, w).
 */

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "superosc/numkit/expr.hpp"
#include "superosc/numkit/ode.hpp"
#include "superosc/numkit/rational.hpp"
#include "superosc/oscillator.hpp"

namespace superosc {

/// f(w), g(w) as expressions in `w`, with a family tag and its parameters.
struct LienardSpec {
  numkit::Expr f;
  numkit::Expr g;
  std::string family;
  std::vector<std::pair<std::string, double>> params;

  [[nodiscard]] double f_at(double w) const;
  [[nodiscard]] double g_at(double w) const;
};

/// F, G and their partials up to second order at (xi, w).
struct MapJet {
  double F, F_xi, F_w, F_xixi, F_xiw, F_ww;
  double G, G_xi, G_w, G_xixi, G_xiw, G_ww;
  [[nodiscard]] double jacobian() const { return F_xi * G_w - F_w * G_xi; }
};

/// y = F(xi, w), x = G(xi, w) with symbolic partials in the variables `xi`, `w`.
class PointMap {
 public:
  PointMap(numkit::Expr F, numkit::Expr G, numkit::EvalOptions options = {});
  [[nodiscard]] MapJet at(double xi, double w) const;
  [[nodiscard]] const numkit::Expr& F() const { return F_[0]; }
  [[nodiscard]] const numkit::Expr& G() const { return G_[0]; }

 private:
  // value, _xi, _w, _xixi, _xiw, _ww
  std::array<numkit::Expr, 6> F_, G_;
  numkit::EvalOptions options_;
};

struct LienardFamily {
  LienardSpec spec;
  PointMap map;
  OscParams osc;  ///< target oscillator (n, delta)
};

/// Lienard state.
struct LienardState {
  double xi = 0.0;
  double w = 0.0;
  double w_xi = 0.0;
};

/// Exact constant when x is a small-denominator rational, a real constant otherwise.
[[nodiscard]] numkit::Expr coefficient(double x);

/**
 * @brief f = alpha, g = 2(n+1) alpha^2/(n+3)^2 w + delta w^n with
 *   F = (n+1)^{-1/(n-1)} w e^{2 alpha xi/(n+3)},  G = (n+3)/(alpha (n-1)) e^{-alpha (n-1) xi/(n+3)}.
 *
 * Throws DomainError for n in {-3, -1, 0, 1}, alpha = 0, delta = 0 or n not rational.
 */
[[nodiscard]] LienardFamily caseII_family(double n, double alpha, double delta);

/// Same Lienard equation as caseII_family, tagged as the Duffing family.
[[nodiscard]] LienardSpec duffing(double n, double alpha, double delta);

/// f = 0, g = -w - delta w^{-3}, F = 2 e^xi w, G = sqrt(2) e^{2 xi}; n = -3.
[[nodiscard]] LienardFamily caseIII_family(double delta);

/**
 * @brief Family built from M(w):
 *   f = 2 C1 n/(n-1) - 3 C1 M M_ww/(2 M_w^2),
 *   g = C1^2 (n+1) M/((n-1) M_w) - C1^2 M^2 M_ww/(2 M_w^3),
 *   F = (-e^{-2 C1 xi} (2 M_w M_www - 3 M_ww^2) / (4 n delta (n+1) M_w^4))^{1/(n-1)},
 *   G = e^{C1 xi} M.
 *
 * The radicand of F carries a sign flip and M_w^4 relative to the printed
 * form, which does not map onto the oscillator. Throws DomainError for
 * n in {-1, 0, 1}, C1 = 0, delta = 0 or n not rational.
 */
[[nodiscard]] LienardFamily caseI_family(const numkit::Expr& M, double C1, double n, double delta,
                                         numkit::EvalOptions options = {});

/// The radicand of F exactly as printed: e^{-2 C1 xi}(2 M_w M_www - 3 M_ww^2)/(4 n delta (n+1) M_w^2).
[[nodiscard]] double caseI_printed_radicand(const numkit::Expr& M, double C1, double n, double delta, double xi,
                                            double w);

/// The fourth-order equation for M, printed form, evaluated at w.
[[nodiscard]] double m_equation_residual(const numkit::Expr& M, double n, double w);

/// Same with the second term's M_ww^2 replaced by M_www^2 (derivative-order homogeneous).
[[nodiscard]] double m_equation_residual_homogeneous(const numkit::Expr& M, double n, double w);

/// M = 1 + 3 mu (m+1)/(2 (m+2) w^m).
[[nodiscard]] numkit::Expr dvdp_M(double m, double mu);

/**
 * @brief Duffing-Van der Pol type family: f = w^m + mu,
 *   g = 2/(9(m+1)) w^{2m+1} + mu/(m+2) w^{m+1} + (m+1) mu^2/(m+2)^2 w,
 * mapped onto n = (1-m)/(3m+1), delta = -1 by
 *   F = (3 sqrt2 mu m (m+1)/((m+2)(3m+1) w^m))^{(3m+1)/(2m)} e^{-mu (3m+1) xi/(2m+4)},
 *   G = e^{-mu m xi/(m+2)} (3 mu (m+1)/(2 (m+2) w^m) + 1).
 *
 * At m = 1 the target exponent is n = 0, outside OscParams; `osc` then
 * holds n = 0 unvalidated. Throws DomainError for m in {-1, -2, -1/3, 0}
 * or mu = 0.
 */
[[nodiscard]] LienardFamily dvdp_example(double m, double mu);

/// C1 = -m mu/(m+2), the constant matching the M-family to the example.
[[nodiscard]] inline double dvdp_C1(double m, double mu) { return -m * mu / (m + 2.0); }

/// Quadratic g = c0 + c1 w + c2 w^2 with exact coefficients.
using QuadraticCoefficients = std::array<numkit::Rational, 3>;

struct DuffingShift {
  LienardSpec spec;                 ///< f = alpha, g = -6 alpha^2/25 w + delta w^2
  numkit::Rational shift;           ///< s = 6 alpha^2/(25 delta)
  QuadraticCoefficients shifted;    ///< g(w + s)
  QuadraticCoefficients target;     ///< duffing(2, alpha, delta)
  [[nodiscard]] bool exact_match() const { return shifted == target; }
};

/// The n = 2 variant with a negative linear term and its shift onto duffing(2, ...).
[[nodiscard]] DuffingShift duffing_shift(numkit::Rational alpha, numkit::Rational delta);

/// (F_xi + F_w w_xi) / (G_xi + G_w w_xi). Throws DomainError when the denominator vanishes.
[[nodiscard]] double mapped_slope(const MapJet& j, double w_xi);

/// ((F_xi + F_w w_xi)/(G_xi + G_w w_xi))^2 + 2 delta F^{n+1}.
[[nodiscard]] double J1(const LienardFamily& fam, const LienardState& s);

/// G - slope F / J1 2F1(a, 1; c; 2 delta F^{n+1} / J1); G when the slope is 0.
/// Throws BranchError for J1 = 0 or an argument outside the real branch.
[[nodiscard]] double J2(const LienardFamily& fam, const LienardState& s);

/// Integrates the Lienard equation over xi in [s0.xi, s0.xi + span]. State layout {w, w_xi}.
[[nodiscard]] numkit::Trajectory integrate_lienard(const LienardSpec& spec, const LienardState& s0, double span,
                                                   double rtol = 1e-12, double atol = 1e-12);

/// y_xx + delta (n+1) y^n along the mapped curve at one state, with
/// y_xx = d(slope)/dxi / (G_xi + G_w w_xi) by the chain rule.
[[nodiscard]] double equivalence_residual(const LienardFamily& fam, const LienardState& s);

struct EquivalenceReport {
  bool completed = false;
  std::string diagnostic;
  std::size_t samples = 0;
  double max_residual = 0.0;
  double max_relative_residual = 0.0;  ///< residual / max(1, |delta (n+1) y^n|)
  double min_abs_jacobian = 0.0;
  std::optional<double> J1_drift;
  std::optional<double> J2_drift;   ///< per slope-sign segment unless the 2F1 terminates
  std::size_t J2_excluded = 0;      ///< samples outside the real branch
};

/// Integrates, maps each sample and reports the Eq. residual and J-drifts.
[[nodiscard]] EquivalenceReport verify_equivalence(const LienardFamily& fam, const LienardState& s0, double span,
                                                   std::size_t dense_samples = 400);

struct AutonomyReport {
  std::size_t samples = 0;
  std::size_t unresolved = 0;   ///< samples where no unique xi root was bracketed
  double max_xi_error = 0.0;    ///< |recovered xi - true xi|
  double drift = 0.0;           ///< drift of J2 at the recovered xi, per slope-sign segment
};

/**
 * @brief Eliminates xi: at each sample solves J1(xi, w, w_xi) = J1(s0) for xi
 * on [xi_lo, xi_hi] (grid scan plus TOMS 748) and evaluates J2 there.
 */
[[nodiscard]] AutonomyReport autonomy_recovery(const LienardFamily& fam, const LienardState& s0, double span,
                                               double xi_lo, double xi_hi, std::size_t samples = 60);

}  // namespace superosc
