#include "superosc/numkit/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "superosc/numkit/errors.hpp"

namespace superosc::numkit {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// PI controller constants (Hairer, Norsett & Wanner).
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;   // largest allowed shrink is 1/5
constexpr double kFacMax = 10.0;  // largest allowed growth

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

const char* to_string(OdeStatus status) noexcept {
  switch (status) {
    case OdeStatus::Completed:
      return "completed";
    case OdeStatus::StepUnderflow:
      return "step_underflow";
    case OdeStatus::NonFinite:
      return "non_finite";
    case OdeStatus::MaxStepsExceeded:
      return "max_steps_exceeded";
  }
  return "unknown";
}

std::span<const double> Trajectory::state(std::size_t i) const {
  if (i >= times_.size()) throw std::out_of_range("Trajectory::state index");
  return {states_.data() + i * dim_, dim_};
}

std::size_t Trajectory::segment_for(double t) const {
  const bool forward = times_.back() >= times_.front();
  const double lo = forward ? times_.front() : times_.back();
  const double hi = forward ? times_.back() : times_.front();
  const double slack = 64 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi));
  if (t < lo - slack || t > hi + slack) {
    std::ostringstream msg;
    msg << "dense output requested at t=" << t << " outside [" << lo << ", " << hi << "]";
    throw DomainError(msg.str());
  }
  if (times_.size() < 2) return 0;
  // Index of the last node not past t in integration order.
  auto it = forward ? std::upper_bound(times_.begin(), times_.end(), t)
                    : std::upper_bound(times_.begin(), times_.end(), t, std::greater<>());
  std::size_t idx = static_cast<std::size_t>(std::distance(times_.begin(), it));
  idx = idx == 0 ? 0 : idx - 1;
  return std::min(idx, times_.size() - 2);
}

void Trajectory::evaluate(double t, std::span<double> out) const {
  if (out.size() != dim_) throw DomainError("Trajectory::evaluate: output size mismatch");
  const std::size_t seg = segment_for(t);
  if (times_.size() < 2) {
    std::copy_n(states_.begin(), dim_, out.begin());
    return;
  }
  if (t == times_[seg]) {
    std::copy_n(states_.begin() + seg * dim_, dim_, out.begin());
    return;
  }
  if (t == times_[seg + 1]) {
    std::copy_n(states_.begin() + (seg + 1) * dim_, dim_, out.begin());
    return;
  }
  const double h = times_[seg + 1] - times_[seg];
  const double theta = (t - times_[seg]) / h;
  const double theta1 = 1.0 - theta;
  const double* r = dense_.data() + seg * 5 * dim_;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double r1 = r[i], r2 = r[dim_ + i], r3 = r[2 * dim_ + i], r4 = r[3 * dim_ + i],
                 r5 = r[4 * dim_ + i];
    out[i] = r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
  }
}

State Trajectory::operator()(double t) const {
  State out(dim_);
  evaluate(t, out);
  return out;
}

std::vector<double> Trajectory::uniform_times(std::size_t count) const {
  std::vector<double> ts;
  if (count < 2) {
    ts.push_back(t_begin());
    return ts;
  }
  ts.reserve(count);
  const double a = t_begin(), b = t_end();
  for (std::size_t i = 0; i < count; ++i) {
    ts.push_back(i + 1 == count ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return ts;
}

Trajectory integrate_ode(const OdeProblem& problem) {
  const std::size_t n = problem.y0.size();
  if (n == 0) throw DomainError("integrate_ode: empty initial state");
  if (!problem.rhs) throw DomainError("integrate_ode: missing right-hand side");
  if (!(problem.rtol >= 1e-14 && problem.rtol <= 1e-2) || !(problem.atol >= 1e-14 && problem.atol <= 1e-2)) {
    throw DomainError("integrate_ode: tolerances must lie in [1e-14, 1e-2]");
  }
  if (!std::isfinite(problem.t0) || !std::isfinite(problem.t1) || problem.t0 == problem.t1) {
    throw DomainError("integrate_ode: time span must be finite and non-empty");
  }
  if (!all_finite(problem.y0)) throw DomainError("integrate_ode: non-finite initial state");

  Trajectory traj;
  traj.dim_ = n;
  traj.times_.push_back(problem.t0);
  traj.states_.insert(traj.states_.end(), problem.y0.begin(), problem.y0.end());

  const double dir = problem.t1 > problem.t0 ? 1.0 : -1.0;
  const double span = std::abs(problem.t1 - problem.t0);
  const double hmax = std::min(problem.max_step, span);
  const double rtol = problem.rtol, atol = problem.atol;

  std::vector<double> y(problem.y0), y1(n), ytmp(n), err(n);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);

  auto scaled_norm = [&](std::span<const double> e, std::span<const double> y_old, std::span<const double> y_new) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = atol + rtol * std::max(std::abs(y_old[i]), std::abs(y_new[i]));
      const double v = e[i] / sk;
      acc += v * v;
    }
    return std::sqrt(acc / static_cast<double>(n));
  };

  double t = problem.t0;
  problem.rhs(t, y, k1);
  if (!all_finite(k1)) {
    traj.status_ = OdeStatus::NonFinite;
    traj.diagnostic_ = "right-hand side is non-finite at the initial state";
    return traj;
  }

  // Initial step guess (Hairer's hinit).
  double h;
  {
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = atol + rtol * std::abs(y[i]);
      dnf += (k1[i] / sk) * (k1[i] / sk);
      dny += (y[i] / sk) * (y[i] / sk);
    }
    h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, hmax);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + dir * h * k1[i];
    problem.rhs(t + dir * h, ytmp, k2);
    double der2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = atol + rtol * std::abs(y[i]);
      der2 += ((k2[i] - k1[i]) / sk) * ((k2[i] - k1[i]) / sk);
    }
    der2 = std::isfinite(der2) ? std::sqrt(der2) / h : 0.0;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 0.2);
    h = std::min({100 * std::abs(h), h1, hmax});
  }

  double facold = 1e-4;
  bool last_rejected = false;
  std::size_t steps = 0;

  while (true) {
    const double remaining = (problem.t1 - t) * dir;
    if (remaining <= 0.0) break;
    if (steps++ >= problem.max_steps) {
      traj.status_ = OdeStatus::MaxStepsExceeded;
      traj.diagnostic_ = "maximum number of steps reached";
      break;
    }
    bool last = false;
    if (h >= remaining) {
      h = remaining;
      last = true;
    }
    if (h < 10.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      traj.status_ = OdeStatus::StepUnderflow;
      std::ostringstream msg;
      msg << "step size underflow at t=" << t << " (possible singularity)";
      traj.diagnostic_ = msg.str();
      break;
    }
    const double hs = dir * h;

    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * a21 * k1[i];
    problem.rhs(t + c2 * hs, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    problem.rhs(t + c3 * hs, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    problem.rhs(t + c4 * hs, ytmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    problem.rhs(t + c5 * hs, ytmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    problem.rhs(t + hs, ytmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      y1[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    problem.rhs(t + hs, y1, k7);

    const bool finite = all_finite(ytmp) && all_finite(y1) && all_finite(k2) && all_finite(k3) &&
                        all_finite(k4) && all_finite(k5) && all_finite(k6) && all_finite(k7);
    if (!finite) {
      // Trial stages left the domain of the right-hand side.
      h *= 0.25;
      last_rejected = true;
      ++traj.rejected_;
      continue;
    }

    for (std::size_t i = 0; i < n; ++i)
      err[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double errn = scaled_norm(err, y, y1);

    const double fac11 = std::pow(std::max(errn, 1e-300), kExpo);
    if (errn <= 1.0) {
      double fac = fac11 / std::pow(facold, kBeta);
      fac = std::clamp(fac / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);
      double hnew = h / fac;
      facold = std::max(errn, 1e-4);

      // Continuous extension coefficients for [t, t+h].
      const std::size_t base = traj.dense_.size();
      traj.dense_.resize(base + 5 * n);
      double* r = traj.dense_.data() + base;
      for (std::size_t i = 0; i < n; ++i) {
        const double ydiff = y1[i] - y[i];
        const double bspl = hs * k1[i] - ydiff;
        r[i] = y[i];
        r[n + i] = ydiff;
        r[2 * n + i] = bspl;
        r[3 * n + i] = ydiff - hs * k7[i] - bspl;
        r[4 * n + i] = hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }

      t = last ? problem.t1 : t + hs;
      y.swap(y1);
      k1.swap(k7);
      traj.times_.push_back(t);
      traj.states_.insert(traj.states_.end(), y.begin(), y.end());

      if (last_rejected) hnew = std::min(hnew, h);
      last_rejected = false;
      h = std::min(hnew, hmax);
      if (last) break;
    } else {
      h = h / std::min(1.0 / kFacMin, fac11 / kSafety);
      last_rejected = true;
      ++traj.rejected_;
    }
  }
  return traj;
}

}  // namespace superosc::numkit
