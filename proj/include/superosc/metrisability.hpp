#pragma once

/**
 * @file metrisability.hpp
 * @brief Projective structure of 2D metrics: Christoffel symbols, projection
 * to y'' + a3 y'^3 + a2 y'^2 + a1 y' + a0 = 0, the Liouville system and the
 * classification of autonomous cubic oscillators with x-independent metrics.
 */

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "superosc/geodesic.hpp"
#include "superosc/numkit/expr.hpp"
#include "superosc/numkit/ode.hpp"

namespace superosc {

/// Metric components and their first partials at a point.
struct MetricJet {
  double g11 = 1.0, g12 = 0.0, g22 = 1.0;
  double g11_x = 0.0, g12_x = 0.0, g22_x = 0.0;
  double g11_y = 0.0, g12_y = 0.0, g22_y = 0.0;
};

using MetricTensorField = std::function<MetricJet(double x, double y)>;

/// Levi-Civita symbols Gamma^i_{jk}; gamma[i][j][k] with indices 0 = x, 1 = y.
struct Christoffel {
  std::array<std::array<std::array<double, 2>, 2>, 2> gamma{};
  [[nodiscard]] double operator()(int i, int j, int k) const { return gamma[i - 1][j - 1][k - 1]; }
};

/// Throws DomainError when det g = 0.
[[nodiscard]] Christoffel christoffel(const MetricJet& g);

/// Coefficients of y'' + a3 y'^3 + a2 y'^2 + a1 y' + a0 = 0.
struct ProjectiveCoefficients {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
};

/// a3 = -G^1_22, a2 = G^2_22 - 2 G^1_12, a1 = 2 G^2_12 - G^1_11, a0 = G^2_11.
[[nodiscard]] ProjectiveCoefficients project(const MetricJet& g);
[[nodiscard]] ProjectiveCoefficients project(const MetricTensorField& g, double x, double y);

/// psi_i with first partials.
struct PsiJet {
  double psi1 = 0.0, psi2 = 0.0, psi3 = 0.0;
  double psi1_x = 0.0, psi2_x = 0.0, psi3_x = 0.0;
  double psi1_y = 0.0, psi2_y = 0.0, psi3_y = 0.0;

  [[nodiscard]] double delta() const { return psi1 * psi3 - psi2 * psi2; }
};

/// The four Liouville equations written as residuals (zero on solutions):
///   psi1_x + 2/3 a1 psi1 - 2 a0 psi2,
///   psi3_y + 2 a3 psi2 - 2/3 a2 psi3,
///   psi1_y + 2 psi2_x + 4/3 a2 psi1 - 2/3 a1 psi2 - 2 a0 psi3,
///   psi3_x + 2 psi2_y + 2 a3 psi1 - 4/3 a1 psi3 + 2/3 a2 psi2.
[[nodiscard]] std::array<double, 4> liouville_residual(const ProjectiveCoefficients& a, const PsiJet& psi);

/// psi = Delta^2 g with Delta = (det g)^{-1/3}. Throws DomainError for det g <= 0.
[[nodiscard]] PsiJet psi_from_metric(const MetricJet& g);

/// g = psi / Delta^2. Throws DomainError for Delta = 0.
[[nodiscard]] MetricJet metric_from_psi(const PsiJet& psi);

/// The metric of geodesic.hpp as a tensor field.
[[nodiscard]] MetricTensorField metric_field(const MetricSpec& m);

/// Coefficient values of an autonomous cubic oscillator at one y.
struct CubicCoefficients {
  double k = 0.0, h = 0.0, f = 0.0, g = 0.0;
  double k_y = 0.0, h_y = 0.0, f_y = 0.0, g_y = 0.0;
};

/**
 * @brief y'' + k(y) y'^3 + h(y) y'^2 + f(y) y' + g(y) = 0 on [y_lo, y_hi].
 *
 * Coefficients are expressions in the variable `y`.
 */
class CubicOscSpec {
 public:
  /// Throws DomainError on an empty interval or a variable other than y.
  CubicOscSpec(numkit::Expr k, numkit::Expr h, numkit::Expr f, numkit::Expr g, double y_lo, double y_hi);

  /// Parses the four coefficient strings.
  static CubicOscSpec parse(const std::string& k, const std::string& h, const std::string& f, const std::string& g,
                            double y_lo, double y_hi);

  [[nodiscard]] CubicCoefficients at(double y) const;
  [[nodiscard]] ProjectiveCoefficients projective(double y) const;
  [[nodiscard]] double y_lo() const { return y_lo_; }
  [[nodiscard]] double y_hi() const { return y_hi_; }
  [[nodiscard]] const std::array<numkit::Expr, 4>& coefficients() const { return coeff_; }  ///< k, h, f, g

 private:
  std::array<numkit::Expr, 4> coeff_;
  std::array<numkit::Expr, 4> deriv_;
  double y_lo_, y_hi_;
};

enum class PsiCase { I, II, III, IV, V, None };

[[nodiscard]] std::string to_string(PsiCase c);

/// `count` Chebyshev points on [lo, hi].
[[nodiscard]] std::vector<double> chebyshev_points(double lo, double hi, std::size_t count = 64);

struct CaseCheck {
  PsiCase which = PsiCase::None;
  /// Largest scaled residual of the case's defining relations.
  double residual = 0.0;
  /// All side conditions (nonvanishing coefficients) held at every sample.
  bool side_conditions = false;
  [[nodiscard]] bool holds(double tol) const { return side_conditions && residual < tol; }
};

struct Classification {
  PsiCase which = PsiCase::None;
  std::vector<CaseCheck> checks;  ///< in test order III, IV, V, II, I
  std::size_t samples = 0;
};

/**
 * @brief First case among III, IV, V, II, I whose relations hold with scaled
 * residual < tol and whose side conditions hold at every sample.
 *
 * Case II additionally requires k = 0 (its psi3 equation needs k psi2 = 0).
 */
[[nodiscard]] Classification classify(const CubicOscSpec& c, const std::vector<double>& samples, double tol = 1e-9);
[[nodiscard]] Classification classify(const CubicOscSpec& c, double tol = 1e-9);

/// Initial data at y0; only the entries the case uses are read:
/// III (psi1, psi3), II (psi2, psi3), IV and V (psi1, psi2, psi3), I (psi3, dpsi3).
struct PsiInitial {
  double psi1 = 0.0, psi2 = 0.0, psi3 = 0.0, dpsi3 = 0.0;
};

/// x-independent solution of the Liouville system on the spec's interval.
class PsiSolution {
 public:
  [[nodiscard]] PsiJet operator()(double y) const;
  [[nodiscard]] PsiCase which() const { return case_; }
  [[nodiscard]] double y_lo() const { return y_lo_; }
  [[nodiscard]] double y_hi() const { return y_hi_; }

  bool completed = false;
  std::string diagnostic;
  /// Largest absolute Liouville residual over the validation grid.
  double max_residual = 0.0;
  /// Smallest |Delta| over the validation grid.
  double min_abs_delta = 0.0;
  /// Integration completed, residual < 1e-7 and Delta bounded away from 0.
  bool validated = false;

 private:
  friend PsiSolution solve_psi(const CubicOscSpec&, PsiCase, double, const PsiInitial&, std::size_t);
  const CubicOscSpec* spec_ = nullptr;
  PsiCase case_ = PsiCase::None;
  double y0_ = 0.0, y_lo_ = 0.0, y_hi_ = 0.0;
  std::optional<numkit::Trajectory> up_, down_;
  [[nodiscard]] std::vector<double> state(double y) const;
};

/**
 * @brief Integrates the case's psi-system in y from y0 over the interval and
 * validates the result against the Liouville residual on `grid` points.
 *
 * The returned object refers to `c`, which must outlive it. Throws
 * DomainError for PsiCase::None or y0 outside the interval.
 */
[[nodiscard]] PsiSolution solve_psi(const CubicOscSpec& c, PsiCase which, double y0, const PsiInitial& init,
                                    std::size_t grid = 200);

/// x-independent metric g = psi/Delta^2 of a solution.
[[nodiscard]] MetricTensorField reconstruct_metric(const PsiSolution& psi);

struct RoundTrip {
  double max_error = 0.0;      ///< max |a_i(projected) - a_i(input)| over the grid
  bool positive_definite = true;
  std::size_t samples = 0;
};

/// Projects the reconstructed metric back and compares with the input coefficients.
[[nodiscard]] RoundTrip round_trip(const CubicOscSpec& c, const PsiSolution& psi, std::size_t grid = 64);

struct CanonicalReport {
  double projection_error = 0.0;  ///< vs a0 = a2 = -lambda_y/(2 lambda), a1 = a3 = 0
  double L_drift = 0.0;           ///< p1 along the flow of H = (p1^2 + p2^2)/(2 lambda)
  double H_drift = 0.0;
  bool completed = false;
};

/// Checks the canonical form lambda(y)(dx^2 + dy^2). Throws DomainError when
/// lambda <= 0 on a sample of [y_lo, y_hi].
[[nodiscard]] CanonicalReport canonical_check(const numkit::Expr& lambda, double y_lo, double y_hi,
                                              double span = 5.0);

}  // namespace superosc
