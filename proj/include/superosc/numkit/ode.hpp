#pragma once

/**
 * @file ode.hpp
 * @brief Adaptive Dormand-Prince 5(4) integration with dense output.
 *
 * The stepper uses the FSAL Dormand-Prince pair with a PI step-size
 * controller and the standard fourth-order continuous extension, so the
 * returned Trajectory can be evaluated anywhere inside the integrated span.
 *
 * Non-finite right-hand-side values inside a trial step are treated as a
 * rejected step. A step size that collapses below a few ulps of t ends the
 * run with StepUnderflow, which is how singularities (y -> 0 for n < 0,
 * finite-time blow-up) surface to callers. The partial trajectory is kept.
 */

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace superosc::numkit {

using State = std::vector<double>;

/// dydt = f(t, y). The callee writes every component of dydt.
using RhsFn = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct OdeProblem {
  RhsFn rhs;
  State y0;
  double t0 = 0.0;
  double t1 = 1.0;
  double rtol = 1e-10;
  double atol = 1e-12;
  /// Upper bound on |h|; infinity means unbounded.
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 2'000'000;
};

enum class OdeStatus {
  Completed,
  StepUnderflow,
  NonFinite,
  MaxStepsExceeded,
};

[[nodiscard]] const char* to_string(OdeStatus status) noexcept;

/// Accepted steps of an integration run. Immutable once built.
class Trajectory {
 public:
  [[nodiscard]] std::size_t dimension() const noexcept { return dim_; }
  [[nodiscard]] std::size_t size() const noexcept { return times_.size(); }
  [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
  [[nodiscard]] std::span<const double> state(std::size_t i) const;

  [[nodiscard]] double t_begin() const noexcept { return times_.front(); }
  [[nodiscard]] double t_end() const noexcept { return times_.back(); }

  [[nodiscard]] OdeStatus status() const noexcept { return status_; }
  [[nodiscard]] bool completed() const noexcept { return status_ == OdeStatus::Completed; }
  [[nodiscard]] const std::string& diagnostic() const noexcept { return diagnostic_; }
  [[nodiscard]] std::size_t rejected_steps() const noexcept { return rejected_; }

  /// Dense output. Exact at grid nodes; t must lie inside [t_begin, t_end]
  /// (or the reversed interval for backward runs).
  [[nodiscard]] State operator()(double t) const;
  void evaluate(double t, std::span<double> out) const;

  /// `count` equally spaced samples over the integrated span (endpoints included).
  [[nodiscard]] std::vector<double> uniform_times(std::size_t count) const;

 private:
  friend Trajectory integrate_ode(const OdeProblem& problem);

  std::size_t segment_for(double t) const;

  std::size_t dim_ = 0;
  std::vector<double> times_;
  std::vector<double> states_;   // size() * dim_
  std::vector<double> dense_;    // (size()-1) * 5 * dim_ continuous-extension coefficients
  OdeStatus status_ = OdeStatus::Completed;
  std::string diagnostic_;
  std::size_t rejected_ = 0;
};

/// Throws DomainError on tolerances outside [1e-14, 1e-2], an empty span or
/// a state of the wrong size. Integration failures are reported through
/// Trajectory::status(), never thrown.
[[nodiscard]] Trajectory integrate_ode(const OdeProblem& problem);

}  // namespace superosc::numkit
