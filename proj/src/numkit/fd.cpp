#include "superosc/numkit/fd.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "superosc/numkit/errors.hpp"

namespace superosc::numkit {

namespace {

double checked(double v, const char* where) {
  if (!std::isfinite(v)) {
    std::ostringstream msg;
    msg << where << ": non-finite sample";
    throw NumericalError(msg.str());
  }
  return v;
}

}  // namespace

std::vector<double> fd_gradient(const ScalarField& fn, std::span<const double> point, double h) {
  if (!(h >= 1e-8 && h <= 1e-3)) throw DomainError("fd_gradient: step must lie in [1e-8, 1e-3]");
  std::vector<double> x(point.begin(), point.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const double step = h * std::max(1.0, std::abs(xi));
    x[i] = xi + step;
    const double fp = checked(fn(x), "fd_gradient");
    x[i] = xi - step;
    const double fm = checked(fn(x), "fd_gradient");
    x[i] = xi;
    grad[i] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

double fd_derivative(const std::function<double(double)>& fn, double t, double h) {
  const double fp = checked(fn(t + h), "fd_derivative");
  const double fm = checked(fn(t - h), "fd_derivative");
  return (fp - fm) / (2.0 * h);
}

double fd_second_derivative(const std::function<double(double)>& fn, double t, double h) {
  const double fp = checked(fn(t + h), "fd_second_derivative");
  const double f0 = checked(fn(t), "fd_second_derivative");
  const double fm = checked(fn(t - h), "fd_second_derivative");
  return (fp - 2.0 * f0 + fm) / (h * h);
}

}  // namespace superosc::numkit
