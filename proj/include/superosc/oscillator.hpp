#pragma once

/**
 * @file oscillator.hpp
 * @brief The anharmonic oscillator y'' + delta (n+1) y^n = 0 and its first
 * integrals.
 *
 * Notation: x is the independent variable, u = y_x. For n = -1 the equation
 * reads y'' + delta / y = 0 and has the logarithmic/erf pair of integrals.
 */

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "superosc/numkit/ode.hpp"
#include "superosc/numkit/rational.hpp"

namespace superosc {

struct OscParams {
  double n = 3.0;
  double delta = 1.0;
  /// Opt-in extension of y^r to y < 0 for rationals with odd denominator.
  bool odd_denominator = false;

  /// Validates n not in {0, 1} and delta != 0; throws DomainError.
  static OscParams make(double n, double delta, bool odd_denominator = false);

  [[nodiscard]] bool log_case() const { return n == -1.0; }
};

struct PhaseState {
  double x = 0.0;
  double y = 1.0;
  double u = 0.0;  ///< y_x
};

/// y^r with the domain rule of `p`.
[[nodiscard]] double osc_power(const OscParams& p, double y, double r);

/// y_xx = -delta (n+1) y^n (-delta / y when n = -1).
[[nodiscard]] double acceleration(const OscParams& p, double y);

/// u^2 + 2 delta y^{n+1}.
[[nodiscard]] double autonomous_integral(const OscParams& p, const PhaseState& s);

/// Hypergeometric parameters (a, b, c) of the transcendental integral.
struct HypParams {
  double a, b, c;
};
[[nodiscard]] HypParams transcendental_parameters(double n);

/// x - y u / I1 * 2F1(a, 1; c; 2 delta y^{n+1} / I1).
/// Exactly at u = 0 (where the non-terminating form jumps) returns x.
/// Throws DomainError for n = -1 or I1 = 0, BranchError if the argument
/// leaves the real branch.
[[nodiscard]] double nonautonomous_integral(const OscParams& p, const PhaseState& s);

enum class IntegralStatus { Ok, Degenerate, OutOfBranch };

struct CheckedValue {
  double value = 0.0;
  IntegralStatus status = IntegralStatus::Ok;
};

/// Tagged variant: Degenerate when |I1| is below `degenerate_tol` relative to
/// its terms (use degenerate_geodesic curves there), OutOfBranch otherwise
/// on a branch failure.
[[nodiscard]] CheckedValue nonautonomous_integral_checked(const OscParams& p, const PhaseState& s,
                                                          double degenerate_tol = 1e-12);

/// x - y / sqrt(I1) * 2F1(1/2, 1/(n+1); 1/(n+1) + 1; 2 delta y^{n+1} / I1).
/// Equal to nonautonomous_integral for u > 0 only.
[[nodiscard]] double nonautonomous_integral_euler(const OscParams& p, const PhaseState& s);

/// n = -(2k+3)/(2k+1).
[[nodiscard]] numkit::Rational polynomial_exponent(unsigned k);

/// Polynomial integral of degree 2k+2 in u, valid at n = polynomial_exponent(k).
/// Throws DomainError if p.n does not match.
[[nodiscard]] double polynomial_integral(const OscParams& p, unsigned k, const PhaseState& s);

/// n = -1: u^2 + 2 delta ln y.
[[nodiscard]] double log_autonomous_integral(double delta, const PhaseState& s);

/// n = -1, delta > 0: x + sqrt(pi/(2 delta)) y exp(u^2/(2 delta)) erf(u/sqrt(2 delta)).
[[nodiscard]] double log_erf_integral(double delta, const PhaseState& s);

enum class Branch { Plus, Minus };

/// x(y) on the level set I1 = C3 != 0, I2 = C4:
///   x = C4 +/- (y/C3) sqrt(C3 - 2 delta y^{n+1}) 2F1(a, 1; c; 2 delta y^{n+1}/C3).
/// Plus corresponds to u > 0. Throws BranchError when C3 - 2 delta y^{n+1} < 0.
[[nodiscard]] double explicit_geodesic(const OscParams& p, double C3, double C4, double y, Branch branch);

/// Level set I1 = 0 (delta < 0): x = C5 +/- 2/((1-n) sqrt(-2 delta)) y^{(1-n)/2}.
[[nodiscard]] double degenerate_geodesic(const OscParams& p, double C5, double y, Branch branch);

/// Integrates (y, u) over x in [s0.x, x_end]. State layout {y, u}.
[[nodiscard]] numkit::Trajectory integrate_oscillator(const OscParams& p, const PhaseState& s0, double x_end,
                                                      double rtol = 1e-12, double atol = 1e-12);

/// Phase state of a trajectory at sample i.
[[nodiscard]] PhaseState phase_at(const numkit::Trajectory& traj, std::size_t i);

/**
 * @brief Largest deviation of `values[i]` from the first value of its segment,
 * where segments are maximal runs with the same `key` sign.
 *
 * Samples with key == 0 are skipped. Used for integrals with jumps at
 * turning points. Deviations are relative to max(1, |segment start|).
 */
[[nodiscard]] double segmented_drift(const std::vector<double>& values, const std::vector<double>& key);

/// max |v_i - v_0| / max(1, |v_0|).
[[nodiscard]] double drift(const std::vector<double>& values);

/// True when 2F1((n+3)/(2n+2), 1; ...) reduces to a finite sum.
[[nodiscard]] bool transcendental_terminates(double n);

/// Drift of every applicable integral along one integrated trajectory.
struct OscillatorDrifts {
  bool completed = false;
  std::string diagnostic;
  std::size_t samples = 0;
  /// Samples dropped from the I2 series (degenerate or out of branch).
  std::size_t excluded = 0;
  std::optional<double> autonomous;      // I1 or N1
  std::optional<double> nonautonomous;   // I2 (per turning-point segment) or N2
  std::optional<double> euler_form;      // I2_alt on u > 0 samples
  std::optional<double> polynomial;      // I2^(k) when n matches some k <= 8
  std::optional<unsigned> polynomial_k;
};

/// Integrates from s0 over x-span `span` and samples every node plus
/// `dense_samples` uniform points.
[[nodiscard]] OscillatorDrifts oscillator_drifts(const OscParams& p, const PhaseState& s0, double span,
                                                 double rtol = 1e-12, std::size_t dense_samples = 400);

/// k with polynomial_exponent(k) == n, if any k <= max_k.
[[nodiscard]] std::optional<unsigned> polynomial_index(double n, unsigned max_k = 8);

/// Box of initial data (x = 0) for random sampling.
struct InitialBox {
  double y_lo, y_hi;
  double u_abs_lo, u_abs_hi;  ///< |u| range; the sign is random
};

/// A box where trajectories of `p` stay regular over moderate spans.
[[nodiscard]] InitialBox default_initial_box(const OscParams& p);

/**
 * @brief Rejection-samples a state in `box` whose trajectory over `span`
 * completes with I1 > 0 and an in-branch I2 at the start.
 *
 * Returns nullopt after `max_tries` rejections.
 */
[[nodiscard]] std::optional<PhaseState> sample_admissible_state(const OscParams& p, const InitialBox& box,
                                                                std::mt19937_64& gen, double span,
                                                                unsigned max_tries = 200);

}  // namespace superosc
