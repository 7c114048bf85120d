#pragma once

/**
 * @file geodesic.hpp
 * @brief The metric whose geodesics project onto the anharmonic oscillator,
 * its Hamiltonian flow and first integrals.
 *
 * Metric: ds^2 = [A dx^2 + C1 dy^2] / (C1^2 A^2) with the conformal factor
 * A(y) = 2 delta C1 y^{n+1} + C2 (A = 2 delta C1 ln y + C2 when n = -1).
 * Phase space coordinates are ordered (x, y, p1, p2).
 */

#include <algorithm>
#include <array>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "superosc/numkit/expr.hpp"
#include "superosc/numkit/ode.hpp"
#include "superosc/oscillator.hpp"

namespace superosc {

struct MetricSpec {
  double C1 = 1.0;
  double C2 = 0.0;
  OscParams osc;

  /// Throws DomainError for C1 == 0 or non-finite constants.
  static MetricSpec make(double C1, double C2, const OscParams& osc);
};

/// Logarithmic branch (n = -1) of the metric.
[[nodiscard]] MetricSpec n_minus1_metric(double C1, double C2, double delta);

struct CoState {
  double x = 0.0;
  double y = 1.0;
  double p1 = 0.0;
  double p2 = 0.0;
};

/// Gradient with respect to (x, y, p1, p2).
using PhaseGradient = std::array<double, 4>;

/// A(y). Throws DomainError outside the power-law domain.
[[nodiscard]] double conformal_factor(const MetricSpec& m, double y);
[[nodiscard]] double conformal_factor_dy(const MetricSpec& m, double y);

struct DiagonalMetric {
  double g11, g22;
  double g11_y, g22_y;
};

/// Covariant components g11 = 1/(C1^2 A), g22 = 1/(C1 A^2) and their y-derivatives.
/// Throws DomainError where A <= 0 or C1 <= 0 (not positive-definite).
[[nodiscard]] DiagonalMetric metric_components(const MetricSpec& m, double y);

/**
 * @brief A (C1 p1^2/2 + A p2^2/2); the log branch carries an extra factor C1.
 *
 * Off the log branch this is half the inverse-metric form divided by C1, so
 * its flow is the geodesic flow up to a constant time rescaling.
 */
[[nodiscard]] double hamiltonian(const MetricSpec& m, const CoState& s);
[[nodiscard]] PhaseGradient hamiltonian_gradient(const MetricSpec& m, const CoState& s);

/// Hamilton's equations over t in [0, span]. State layout {x, y, p1, p2}.
[[nodiscard]] numkit::Trajectory geodesic_flow(const MetricSpec& m, const CoState& s0, double span,
                                               double rtol = 1e-12, double atol = 1e-13,
                                               std::size_t max_steps = 2'000'000);

[[nodiscard]] CoState costate_at(const numkit::Trajectory& traj, std::size_t i);
[[nodiscard]] CoState costate_at(const numkit::Trajectory& traj, double t);

/// y_x = H_p2 / H_p1 = A p2 / (C1 p1). Throws DomainError for p1 = 0.
[[nodiscard]] double lifted_slope(const MetricSpec& m, const CoState& s);

/// L = p1.
[[nodiscard]] inline double integral_L(const CoState& s) { return s.p1; }

/// R = A^2 p2^2 / (C1^2 p1^2) + 2 delta y^{n+1}. Throws DomainError for p1 = 0.
[[nodiscard]] double integral_R(const MetricSpec& m, const CoState& s);
[[nodiscard]] PhaseGradient integral_R_gradient(const MetricSpec& m, const CoState& s);

/**
 * @brief Lifted transcendental integral
 *   T = x - y v / (1 + 2 delta y^{n+1} v^2) 2F1(a, 1; c; 1 / (1 + 2 delta y^{n+1} v^2)),
 *   v = (1 + C2 / (2 C1 delta y^{n+1})) p2 / p1.
 *
 * Returns x when v = 0. Throws DomainError for p1 = 0 or n = -1,
 * BranchError outside the real branch.
 */
[[nodiscard]] double integral_T(const MetricSpec& m, const CoState& s);

/**
 * @brief Polynomial integral of degree 2k+2 in the momenta, valid at
 * n = -(2k+3)/(2k+1), with vt = (C2/C1 + 2 delta y^{-2/(2k+1)}) p2.
 *
 * Equals p1^{2k+2} I2^(k)(x, y, vt / p1). Throws DomainError when n does
 * not match k.
 */
[[nodiscard]] double integral_Tk(const MetricSpec& m, unsigned k, const CoState& s);

/// n = -1, delta > 0: the erf integral lifted via y_x = H_p2/H_p1.
[[nodiscard]] double lifted_log_integral(const MetricSpec& m, const CoState& s);

/// (n+1) C1^2 delta (C2 n y^{n-1} + delta C1 (n-1) y^{2n}).
[[nodiscard]] double curvature(const MetricSpec& m, double y);

/**
 * @brief Gaussian curvature from the metric components alone, by the
 * Brioschi formula for a diagonal metric E(y) dx^2 + G(y) dy^2:
 *   K = -1/(2 sqrt(EG)) d/dy (E_y / sqrt(EG)),
 * with both derivatives taken by five-point differences of step h.
 */
[[nodiscard]] double brioschi_curvature(const MetricSpec& m, double y, double h = 1e-3);

/// Sum_i dF/dq_i dG/dp_i - dF/dp_i dG/dq_i.
[[nodiscard]] double poisson_bracket(const PhaseGradient& f, const PhaseGradient& g);

/// Bracket divided by |grad F| |grad G| (0 when either gradient vanishes).
[[nodiscard]] double normalized_bracket(const PhaseGradient& f, const PhaseGradient& g);

/// Central-difference gradient of a phase-space function.
template <class F>
[[nodiscard]] PhaseGradient fd_phase_gradient(F&& fn, const CoState& s, double h = 1e-6);

/// Symbolic phase function in the variables x, y, p1, p2 with its gradient.
class PhaseFunction {
 public:
  explicit PhaseFunction(numkit::Expr e);
  [[nodiscard]] double value(const CoState& s) const;
  [[nodiscard]] PhaseGradient gradient(const CoState& s) const;
  [[nodiscard]] const numkit::Expr& expr() const { return expr_; }

 private:
  numkit::Expr expr_;
  std::array<numkit::Expr, 4> grad_;
};

/// n = -5/3, delta = C1 = 1, C2 = 0 example.
struct QuarticExample {
  numkit::Expr hamiltonian;    ///< p1^2/y^{2/3} + 2 p2^2/y^{4/3}
  numkit::Expr integral;       ///< corrected T1, equal to integral_Tk(k = 1) / 4
  numkit::Expr printed;        ///< first term x p1^4 / y^{2/3} as printed
};
[[nodiscard]] QuarticExample quartic_example();

/// n = -7/5, delta = C1 = 1, C2 = 0 example; the p2^5 p1 / y coefficient is a parameter.
struct SexticExample {
  numkit::Expr hamiltonian;  ///< p1^2/y^{2/5} + 2 p2^2/y^{4/5}
  numkit::Expr integral;     ///< T2 with the given coefficient
};
[[nodiscard]] SexticExample sextic_example(double p2p1_coefficient);

/// Terms of T2 without the p2^5 p1 / y term, and that monomial.
[[nodiscard]] numkit::Expr sextic_integral_base();
[[nodiscard]] numkit::Expr sextic_garbled_monomial();

struct CoefficientFit {
  double coefficient = 0.0;
  /// Largest normalized bracket with the fitted coefficient.
  double max_residual = 0.0;
};

/**
 * @brief Least-squares value of c making {T2_base + c q, H} vanish at the
 * given states (the bracket is linear in c).
 */
[[nodiscard]] CoefficientFit solve_sextic_coefficient(const std::vector<CoState>& states);

/// Singular values (descending) of the matrix whose rows are the given gradients.
[[nodiscard]] std::vector<double> singular_values(const std::vector<PhaseGradient>& rows);

/// Residual of y_xx + delta (n+1) y^n along the projection of a trajectory at time t,
/// with y_x = H_p2/H_p1 differentiated in t by central differences of step h.
[[nodiscard]] double projection_residual(const MetricSpec& m, const numkit::Trajectory& traj, double t,
                                         double h = 1e-4);

struct GeodesicDrifts {
  bool completed = false;
  std::string diagnostic;
  std::size_t samples = 0;
  std::size_t excluded = 0;  ///< T samples dropped (degenerate or out of branch)
  double L = 0.0;
  double H = 0.0;
  std::optional<double> R;
  std::optional<double> T;              // per p2-sign segment unless terminating
  std::optional<double> Tk;             // when n matches some k <= 8
  std::optional<unsigned> k;
  std::optional<double> lifted_log;     // n = -1, delta > 0
};

[[nodiscard]] GeodesicDrifts geodesic_drifts(const MetricSpec& m, const CoState& s0, double span,
                                             double rtol = 1e-12, std::size_t dense_samples = 400);

/// Initial co-states at x = 0 for random sampling.
struct CoStateBox {
  double y_lo, y_hi;
  double p1_abs_lo, p1_abs_hi;  ///< |p1| range; the sign is random
  double p2_abs_hi;             ///< p2 uniform in [-p2_abs_hi, p2_abs_hi]
};

/**
 * @brief Rejection-samples a co-state in `box` where the metric is
 * positive-definite, T is in branch (off the log branch) and the flow over
 * `span` completes within 100000 steps. Returns nullopt after `max_tries` rejections.
 */
[[nodiscard]] std::optional<CoState> sample_costate(const MetricSpec& m, const CoStateBox& box, std::mt19937_64& gen,
                                                    double span, unsigned max_tries = 200);

template <class F>
PhaseGradient fd_phase_gradient(F&& fn, const CoState& s, double h) {
  PhaseGradient g{};
  const std::array<double, 4> q{s.x, s.y, s.p1, s.p2};
  for (std::size_t i = 0; i < 4; ++i) {
    const double step = h * std::max(1.0, q[i] < 0 ? -q[i] : q[i]);
    auto plus = q, minus = q;
    plus[i] += step;
    minus[i] -= step;
    const double fp = fn(CoState{plus[0], plus[1], plus[2], plus[3]});
    const double fm = fn(CoState{minus[0], minus[1], minus[2], minus[3]});
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

}  // namespace superosc
