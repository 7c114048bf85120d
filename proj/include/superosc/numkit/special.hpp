#pragma once

#include <optional>

namespace superosc::numkit {

/**
 * Gauss hypergeometric function 2F1(a, b; c; z) on the real principal branch.
 *
 *  - terminating series (a or b a nonpositive integer): finite sum, any real z
 *  - |z| <= 1/2: defining power series
 *  - 1/2 < z < 1: connection formula in 1 - z
 *  - z < -1/2: Pfaff transformation z -> z/(z-1), then one of the above
 *
 * Throws DomainError when c is a pole of the series and BranchError for
 * z >= 1 in the non-terminating case.
 */
[[nodiscard]] double hyp2f1(double a, double b, double c, double z);

/// Same function with 1 - z supplied by the caller. Near z = 1 the caller
/// can usually form 1 - z without cancellation (e.g. u^2 / I1), which keeps
/// the (1-z)^{c-a-b} factor accurate.
[[nodiscard]] double hyp2f1(double a, double b, double c, double z, double one_minus_z);

/// Error function; odd, |erf(x)| < 1.
[[nodiscard]] double erf_fn(double x);

/// Rising factorial (a)_s = a (a+1) ... (a+s-1); (a)_0 = 1.
[[nodiscard]] double pochhammer(double a, unsigned s);

[[nodiscard]] double binomial(unsigned k, unsigned s);

/// If x is within `tol` of an integer, that integer.
[[nodiscard]] std::optional<long long> near_integer(double x, double tol = 1e-12);

/// Power y^r. Negative y is accepted for integer r, and for rationals with an
/// odd denominator when `odd_denominator` is set (sign(y)|y|^r style with the
/// numerator's parity). Throws DomainError otherwise, and for 0^negative.
[[nodiscard]] double real_power(double y, double r, bool odd_denominator = false);

}  // namespace superosc::numkit
