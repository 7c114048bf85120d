#include "superosc/numkit/poly.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "superosc/numkit/errors.hpp"

namespace superosc::numkit {

std::vector<double> interpolate_polynomial(const std::function<double(double)>& fn, unsigned max_degree,
                                           double lo, double hi) {
  if (!(lo < hi)) throw DomainError("interpolate_polynomial: requires lo < hi");
  const int m = static_cast<int>(max_degree) + 1;
  Eigen::MatrixXd v(m, m);
  Eigen::VectorXd rhs(m);
  for (int i = 0; i < m; ++i) {
    const double t = std::cos(std::numbers::pi * (2.0 * i + 1.0) / (2.0 * m));
    const double x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * t;
    double xp = 1.0;
    for (int j = 0; j < m; ++j) {
      v(i, j) = xp;
      xp *= x;
    }
    rhs(i) = fn(x);
  }
  const Eigen::VectorXd c = v.colPivHouseholderQr().solve(rhs);
  return {c.data(), c.data() + m};
}

std::vector<std::vector<double>> interpolate_polynomial_2d(const std::function<double(double, double)>& fn,
                                                           unsigned max_degree, double lo, double hi) {
  // Fit in b for each coefficient of the fit in a.
  std::vector<std::vector<double>> out(max_degree + 1);
  for (unsigned i = 0; i <= max_degree; ++i) {
    out[i] = interpolate_polynomial(
        [&](double b) { return interpolate_polynomial([&](double a) { return fn(a, b); }, max_degree, lo, hi)[i]; },
        max_degree, lo, hi);
  }
  return out;
}

int total_degree(const std::vector<std::vector<double>>& coeffs, double tol, int* min_total) {
  double scale = 1.0;
  for (const auto& row : coeffs) {
    for (double c : row) scale = std::max(scale, std::abs(c));
  }
  int hi = -1;
  int lo = -1;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    for (std::size_t j = 0; j < coeffs[i].size(); ++j) {
      if (std::abs(coeffs[i][j]) <= tol * scale) continue;
      const int d = static_cast<int>(i + j);
      hi = std::max(hi, d);
      lo = lo < 0 ? d : std::min(lo, d);
    }
  }
  if (min_total) *min_total = lo;
  return hi;
}

int numerical_degree(const std::vector<double>& coeffs, double tol) {
  double scale = 1.0;
  for (double c : coeffs) scale = std::max(scale, std::abs(c));
  for (int i = static_cast<int>(coeffs.size()) - 1; i >= 0; --i) {
    if (std::abs(coeffs[i]) > tol * scale) return i;
  }
  return -1;
}

}  // namespace superosc::numkit
