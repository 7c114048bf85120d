#pragma once

#include <functional>
#include <span>
#include <vector>

namespace superosc::numkit {

using ScalarField = std::function<double(std::span<const double>)>;

/// Central-difference gradient, O(h^2). The step for coordinate i is
/// h * max(1, |point_i|). Requires h in [1e-8, 1e-3]; throws NumericalError
/// if any sample is non-finite.
[[nodiscard]] std::vector<double> fd_gradient(const ScalarField& fn, std::span<const double> point, double h = 1e-5);

/// df/dt by central differences.
[[nodiscard]] double fd_derivative(const std::function<double(double)>& fn, double t, double h);

/// d2f/dt2 by the three-point stencil.
[[nodiscard]] double fd_second_derivative(const std::function<double(double)>& fn, double t, double h);

}  // namespace superosc::numkit
