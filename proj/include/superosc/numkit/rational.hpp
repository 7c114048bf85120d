#pragma once

#include <boost/rational.hpp>
#include <string>

namespace superosc::numkit {

/// Exact exponent/coefficient type used by the expression layer.
using Rational = boost::rational<long long>;

/// Best rational approximation with denominator <= max_den, accepted only if
/// it reproduces x to a few ulps. Throws DomainError otherwise.
[[nodiscard]] Rational rational_from_double(double x, long long max_den = 1'000'000);

[[nodiscard]] inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

[[nodiscard]] std::string to_string(const Rational& r);

}  // namespace superosc::numkit
