#pragma once

/// Polynomial fits used for degree checks.

#include <functional>
#include <vector>

namespace superosc::numkit {

/**
 * @brief Monomial coefficients c_0..c_max_degree of the interpolant of `fn`
 * at max_degree + 1 Chebyshev nodes on [lo, hi].
 *
 * Solved with a column-pivoted QR on the Vandermonde matrix. Throws
 * DomainError for lo >= hi.
 */
[[nodiscard]] std::vector<double> interpolate_polynomial(const std::function<double(double)>& fn,
                                                         unsigned max_degree, double lo, double hi);

/**
 * @brief Tensor-product interpolant of fn(a, b) on [lo, hi]^2; entry [i][j]
 * is the coefficient of a^i b^j.
 */
[[nodiscard]] std::vector<std::vector<double>> interpolate_polynomial_2d(
    const std::function<double(double, double)>& fn, unsigned max_degree, double lo, double hi);

/// Largest i + j over coefficients above tol * max(1, max |c|); -1 if none.
/// Also reports the smallest such total degree through `min_total` when given.
[[nodiscard]] int total_degree(const std::vector<std::vector<double>>& coeffs, double tol = 1e-8,
                               int* min_total = nullptr);

/// Largest index with |c_i| > tol * max(1, max_j |c_j|); -1 if all vanish.
[[nodiscard]] int numerical_degree(const std::vector<double>& coeffs, double tol = 1e-8);

}  // namespace superosc::numkit
