#include "superosc/numkit/special.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "superosc/numkit/errors.hpp"
#include "superosc/numkit/rational.hpp"

namespace superosc::numkit {

namespace {

constexpr int kMaxTerms = 200000;
constexpr double kSeriesEps = 1e-17;

std::optional<long long> nonpositive_integer(double x) {
  auto k = near_integer(x);
  if (k && *k <= 0) return k;
  return std::nullopt;
}

double reciprocal_gamma(double x) {
  if (nonpositive_integer(x)) return 0.0;
  return 1.0 / std::tgamma(x);
}

double power_series(double a, double b, double c, double z) {
  double term = 1.0;
  double sum = 1.0;
  int small_run = 0;
  for (int k = 0; k < kMaxTerms; ++k) {
    term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    sum += term;
    if (term == 0.0) return sum;
    small_run = std::abs(term) <= kSeriesEps * std::abs(sum) ? small_run + 1 : 0;
    if (small_run >= 2) return sum;
  }
  std::ostringstream msg;
  msg << "hyp2f1: series did not converge for (" << a << ", " << b << ", " << c << ", " << z << ")";
  throw NumericalError(msg.str());
}

double finite_sum(double a, double b, double c, double z, long long m) {
  double term = 1.0;
  double sum = 1.0;
  for (long long k = 0; k < m; ++k) {
    term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    sum += term;
  }
  return sum;
}

double hyp_impl(double a, double b, double c, double z, double omz) {
  if (z == 0.0 || a == 0.0 || b == 0.0) return 1.0;

  const auto ma = nonpositive_integer(a);
  const auto mb = nonpositive_integer(b);
  std::optional<long long> terms;
  if (ma) terms = -*ma;
  if (mb && (!terms || -*mb < *terms)) terms = -*mb;

  if (const auto mc = nonpositive_integer(c)) {
    // The series survives a pole in c only if it stops before reaching it.
    if (!terms || *terms > -*mc) {
      std::ostringstream msg;
      msg << "hyp2f1: c = " << c << " is a pole of the series";
      throw DomainError(msg.str());
    }
  }
  if (terms) return finite_sum(a, b, c, z, *terms);

  if (z >= 1.0 || omz <= 0.0) {
    std::ostringstream msg;
    msg << "hyp2f1: argument z = " << z << " outside the principal real branch";
    throw BranchError(msg.str());
  }
  if (std::abs(z) <= 0.5) return power_series(a, b, c, z);

  if (z < 0.0) {
    // Pfaff: F(a,b;c;z) = (1-z)^{-a} F(a, c-b; c; z/(z-1)); keep the variant
    // that terminates when one exists.
    const double w = z / (z - 1.0);
    const double omw = 1.0 / (1.0 - z);
    if (!nonpositive_integer(c - b) && nonpositive_integer(c - a)) {
      return std::pow(1.0 - z, -b) * hyp_impl(c - a, b, c, w, omw);
    }
    return std::pow(1.0 - z, -a) * hyp_impl(a, c - b, c, w, omw);
  }

  // 1/2 < z < 1.
  const double s = c - a - b;
  if (near_integer(s, 1e-9)) {
    // Connection formula is singular for integer c-a-b; the direct series still
    // converges at a usable rate away from z = 1.
    if (z <= 0.98) return power_series(a, b, c, z);
    std::ostringstream msg;
    msg << "hyp2f1: integer c-a-b with z = " << z << " too close to 1";
    throw NumericalError(msg.str());
  }
  const double gc = std::tgamma(c);
  const double coef1 = gc * std::tgamma(s) * reciprocal_gamma(c - a) * reciprocal_gamma(c - b);
  const double coef2 = gc * std::tgamma(-s) * reciprocal_gamma(a) * reciprocal_gamma(b);
  double result = 0.0;
  if (coef1 != 0.0) result += coef1 * hyp_impl(a, b, 1.0 - s, omz, z);
  if (coef2 != 0.0) result += coef2 * std::pow(omz, s) * hyp_impl(c - a, c - b, 1.0 + s, omz, z);
  return result;
}

}  // namespace

std::optional<long long> near_integer(double x, double tol) {
  if (!std::isfinite(x)) return std::nullopt;
  const double r = std::round(x);
  if (std::abs(x - r) <= tol * std::max(1.0, std::abs(x))) return static_cast<long long>(r);
  return std::nullopt;
}

double hyp2f1(double a, double b, double c, double z) { return hyp_impl(a, b, c, z, 1.0 - z); }

double hyp2f1(double a, double b, double c, double z, double one_minus_z) {
  return hyp_impl(a, b, c, z, one_minus_z);
}

double erf_fn(double x) { return std::erf(x); }

double pochhammer(double a, unsigned s) {
  double p = 1.0;
  for (unsigned i = 0; i < s; ++i) p *= a + i;
  return p;
}

double binomial(unsigned k, unsigned s) {
  if (s > k) return 0.0;
  double r = 1.0;
  for (unsigned i = 1; i <= s; ++i) r = r * (k - s + i) / i;
  return std::round(r);
}

double real_power(double y, double r, bool odd_denominator) {
  if (y > 0.0) return std::pow(y, r);
  if (y == 0.0) {
    if (r > 0.0) return 0.0;
    if (r == 0.0) return 1.0;
    throw DomainError("real_power: zero raised to a negative power");
  }
  if (const auto k = near_integer(r)) return std::pow(y, static_cast<double>(*k));
  if (odd_denominator) {
    const Rational q = rational_from_double(r);
    if (q.denominator() % 2 != 0) {
      const double mag = std::pow(-y, r);
      return (q.numerator() % 2 != 0) ? -mag : mag;
    }
  }
  std::ostringstream msg;
  msg << "real_power: negative base " << y << " with non-integer exponent " << r;
  throw DomainError(msg.str());
}

Rational rational_from_double(double x, long long max_den) {
  if (!std::isfinite(x)) throw DomainError("rational_from_double: non-finite value");
  // Continued-fraction convergents.
  long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double v = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double fl = std::floor(v);
    if (std::abs(fl) > 9e15) break;
    const long long ai = static_cast<long long>(fl);
    const long long h2 = ai * h1 + h0;
    const long long k2 = ai * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    const double approx = static_cast<double>(h1) / static_cast<double>(k1);
    if (std::abs(approx - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) {
      return Rational(h1, k1);
    }
    const double frac = v - fl;
    if (frac == 0.0) break;
    v = 1.0 / frac;
  }
  std::ostringstream msg;
  msg << "value " << x << " is not a rational with denominator <= " << max_den;
  throw DomainError(msg.str());
}

std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

}  // namespace superosc::numkit
