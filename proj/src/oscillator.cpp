#include "superosc/oscillator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "superosc/numkit/errors.hpp"
#include "superosc/numkit/special.hpp"

namespace superosc {

using numkit::hyp2f1;
using numkit::Rational;

OscParams OscParams::make(double n, double delta, bool odd_denominator) {
  if (!std::isfinite(n) || !std::isfinite(delta)) throw DomainError("OscParams: non-finite parameter");
  if (n == 0.0 || n == 1.0) throw DomainError("OscParams: exponent n must not be 0 or 1");
  if (delta == 0.0) throw DomainError("OscParams: delta must be nonzero");
  return OscParams{n, delta, odd_denominator};
}

double osc_power(const OscParams& p, double y, double r) { return numkit::real_power(y, r, p.odd_denominator); }

double acceleration(const OscParams& p, double y) {
  if (p.log_case()) {
    if (y == 0.0) throw DomainError("acceleration: y = 0 with n = -1");
    return -p.delta / y;
  }
  return -p.delta * (p.n + 1.0) * osc_power(p, y, p.n);
}

double autonomous_integral(const OscParams& p, const PhaseState& s) {
  return s.u * s.u + 2.0 * p.delta * osc_power(p, s.y, p.n + 1.0);
}

HypParams transcendental_parameters(double n) {
  return {(n + 3.0) / (2.0 * n + 2.0), 1.0, (n + 2.0) / (n + 1.0)};
}

double nonautonomous_integral(const OscParams& p, const PhaseState& s) {
  if (p.log_case()) throw DomainError("nonautonomous_integral: n = -1 uses log_erf_integral");
  const double w = 2.0 * p.delta * osc_power(p, s.y, p.n + 1.0);
  const double i1 = s.u * s.u + w;
  if (i1 == 0.0) throw BranchError("nonautonomous_integral: I1 = 0 (degenerate level set)");
  if (s.u == 0.0) return s.x;
  const auto [a, b, c] = transcendental_parameters(p.n);
  const double f = hyp2f1(a, b, c, w / i1, s.u * s.u / i1);
  return s.x - s.y * s.u / i1 * f;
}

CheckedValue nonautonomous_integral_checked(const OscParams& p, const PhaseState& s, double degenerate_tol) {
  const double w = 2.0 * p.delta * osc_power(p, s.y, p.n + 1.0);
  const double i1 = s.u * s.u + w;
  if (std::abs(i1) <= degenerate_tol * (s.u * s.u + std::abs(w))) return {s.x, IntegralStatus::Degenerate};
  try {
    return {nonautonomous_integral(p, s), IntegralStatus::Ok};
  } catch (const BranchError&) {
    return {std::nan(""), IntegralStatus::OutOfBranch};
  }
}

double nonautonomous_integral_euler(const OscParams& p, const PhaseState& s) {
  if (p.log_case()) throw DomainError("nonautonomous_integral_euler: n = -1 excluded");
  const double w = 2.0 * p.delta * osc_power(p, s.y, p.n + 1.0);
  const double i1 = s.u * s.u + w;
  if (!(i1 > 0.0)) throw BranchError("nonautonomous_integral_euler: requires I1 > 0");
  const double b = 1.0 / (p.n + 1.0);
  const double f = hyp2f1(0.5, b, b + 1.0, w / i1, s.u * s.u / i1);
  return s.x - s.y / std::sqrt(i1) * f;
}

Rational polynomial_exponent(unsigned k) {
  const long long kk = k;
  return Rational(-(2 * kk + 3), 2 * kk + 1);
}

double polynomial_integral(const OscParams& p, unsigned k, const PhaseState& s) {
  const double expected = numkit::to_double(polynomial_exponent(k));
  if (std::abs(p.n - expected) > 1e-12) {
    std::ostringstream msg;
    msg << "polynomial_integral: k = " << k << " requires n = " << numkit::to_string(polynomial_exponent(k))
        << ", got " << p.n;
    throw DomainError(msg.str());
  }
  const double r = -2.0 / (2.0 * k + 1.0);  // n + 1
  const double yr = osc_power(p, s.y, r);
  const double e = s.u * s.u + 2.0 * p.delta * yr;
  double sum = 0.0;
  double two_delta_s = 1.0;
  double yr_s = 1.0;
  double factorial = 1.0;
  for (unsigned j = 0; j <= k; ++j) {
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    sum += sign * numkit::binomial(k, j) * two_delta_s * factorial / numkit::pochhammer(0.5 - k, j) * yr_s *
           std::pow(e, static_cast<double>(k - j));
    two_delta_s *= 2.0 * p.delta;
    yr_s *= yr;
    factorial *= j + 1.0;
  }
  return s.x * std::pow(e, static_cast<double>(k + 1)) - s.y * s.u * sum;
}

double log_autonomous_integral(double delta, const PhaseState& s) {
  if (!(s.y > 0.0)) throw DomainError("log_autonomous_integral: requires y > 0");
  return s.u * s.u + 2.0 * delta * std::log(s.y);
}

double log_erf_integral(double delta, const PhaseState& s) {
  if (!(s.y > 0.0)) throw DomainError("log_erf_integral: requires y > 0");
  if (!(delta > 0.0)) throw DomainError("log_erf_integral: requires delta > 0");
  const double r = std::sqrt(2.0 * delta);
  return s.x + std::sqrt(std::numbers::pi / (2.0 * delta)) * s.y * std::exp(s.u * s.u / (2.0 * delta)) *
                   numkit::erf_fn(s.u / r);
}

double explicit_geodesic(const OscParams& p, double C3, double C4, double y, Branch branch) {
  if (p.log_case()) throw DomainError("explicit_geodesic: n = -1 excluded");
  if (C3 == 0.0) throw DomainError("explicit_geodesic: C3 = 0, use degenerate_geodesic");
  const double w = 2.0 * p.delta * osc_power(p, y, p.n + 1.0);
  const double rad = C3 - w;
  if (rad < 0.0) {
    std::ostringstream msg;
    msg << "explicit_geodesic: C3 - 2 delta y^(n+1) = " << rad << " < 0 at y = " << y;
    throw BranchError(msg.str());
  }
  const auto [a, b, c] = transcendental_parameters(p.n);
  const double f = hyp2f1(a, b, c, w / C3, rad / C3);
  const double offset = y / C3 * std::sqrt(rad) * f;
  return branch == Branch::Plus ? C4 + offset : C4 - offset;
}

double degenerate_geodesic(const OscParams& p, double C5, double y, Branch branch) {
  if (!(p.delta < 0.0)) throw DomainError("degenerate_geodesic: requires delta < 0");
  if (p.n == 1.0) throw DomainError("degenerate_geodesic: n = 1 excluded");
  const double offset = 2.0 / ((1.0 - p.n) * std::sqrt(-2.0 * p.delta)) * osc_power(p, y, (1.0 - p.n) / 2.0);
  return branch == Branch::Plus ? C5 + offset : C5 - offset;
}

numkit::Trajectory integrate_oscillator(const OscParams& p, const PhaseState& s0, double x_end, double rtol,
                                        double atol) {
  numkit::OdeProblem prob;
  prob.rhs = [p](double, std::span<const double> q, std::span<double> dq) {
    dq[0] = q[1];
    // Outside the power-law domain the stage is rejected by the integrator.
    try {
      dq[1] = acceleration(p, q[0]);
    } catch (const DomainError&) {
      dq[1] = std::nan("");
    }
  };
  prob.y0 = {s0.y, s0.u};
  prob.t0 = s0.x;
  prob.t1 = x_end;
  prob.rtol = rtol;
  prob.atol = atol;
  return numkit::integrate_ode(prob);
}

PhaseState phase_at(const numkit::Trajectory& traj, std::size_t i) {
  const auto q = traj.state(i);
  return {traj.times()[i], q[0], q[1]};
}

double segmented_drift(const std::vector<double>& values, const std::vector<double>& key) {
  double worst = 0.0;
  double start = 0.0;
  int sign = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int si = key[i] > 0.0 ? 1 : (key[i] < 0.0 ? -1 : 0);
    if (si == 0) continue;
    if (si != sign) {
      sign = si;
      start = values[i];
      continue;
    }
    worst = std::max(worst, std::abs(values[i] - start) / std::max(1.0, std::abs(start)));
  }
  return worst;
}

double drift(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const double v0 = values.front();
  double worst = 0.0;
  for (double v : values) worst = std::max(worst, std::abs(v - v0) / std::max(1.0, std::abs(v0)));
  return worst;
}

bool transcendental_terminates(double n) {
  const auto k = numkit::near_integer(transcendental_parameters(n).a, 1e-12);
  return k && *k <= 0;
}

std::optional<unsigned> polynomial_index(double n, unsigned max_k) {
  for (unsigned k = 0; k <= max_k; ++k) {
    if (std::abs(n - numkit::to_double(polynomial_exponent(k))) <= 1e-12) return k;
  }
  return std::nullopt;
}

OscillatorDrifts oscillator_drifts(const OscParams& p, const PhaseState& s0, double span, double rtol,
                                   std::size_t dense_samples) {
  OscillatorDrifts out;
  const auto traj = integrate_oscillator(p, s0, s0.x + span, rtol);
  out.completed = traj.completed();
  out.diagnostic = traj.diagnostic();

  std::vector<PhaseState> pts;
  for (std::size_t i = 0; i < traj.size(); ++i) pts.push_back(phase_at(traj, i));
  if (traj.size() > 1) {
    for (double t : traj.uniform_times(dense_samples)) {
      const auto q = traj(t);
      pts.push_back({t, q[0], q[1]});
    }
  }
  std::sort(pts.begin(), pts.end(), [](const PhaseState& a, const PhaseState& b) { return a.x < b.x; });
  out.samples = pts.size();

  std::vector<double> auto_vals, non_vals, keys, poly_vals;
  // I2_alt is conserved on u > 0 only; each positive run is checked separately.
  std::vector<double> euler_run;
  double euler_worst = 0.0;
  bool euler_any = false;
  const auto close_euler_run = [&] {
    if (euler_run.size() > 1) {
      euler_worst = std::max(euler_worst, drift(euler_run));
      euler_any = true;
    }
    euler_run.clear();
  };

  const auto k = polynomial_index(p.n);
  out.polynomial_k = k;
  for (const auto& s : pts) {
    if (p.log_case()) {
      auto_vals.push_back(log_autonomous_integral(p.delta, s));
      if (p.delta > 0.0) non_vals.push_back(log_erf_integral(p.delta, s));
      continue;
    }
    auto_vals.push_back(autonomous_integral(p, s));
    const auto v = s.u == 0.0 ? CheckedValue{s.x, IntegralStatus::Degenerate} : nonautonomous_integral_checked(p, s);
    if (v.status == IntegralStatus::Ok) {
      non_vals.push_back(v.value);
      keys.push_back(s.u);
    } else {
      ++out.excluded;
    }
    if (s.u > 0.0 && autonomous_integral(p, s) > 0.0) {
      euler_run.push_back(nonautonomous_integral_euler(p, s));
    } else {
      close_euler_run();
    }
    if (k) poly_vals.push_back(polynomial_integral(p, *k, s));
  }
  close_euler_run();

  out.autonomous = drift(auto_vals);
  if (!non_vals.empty()) {
    const bool smooth = p.log_case() || transcendental_terminates(p.n);
    out.nonautonomous = smooth ? drift(non_vals) : segmented_drift(non_vals, keys);
  }
  if (euler_any) out.euler_form = euler_worst;
  if (k) out.polynomial = drift(poly_vals);
  return out;
}

InitialBox default_initial_box(const OscParams& p) {
  if (p.n > 1.0) return {0.02, 0.15, 0.0, 0.15};
  if (p.log_case()) return {2.0, 4.0, 0.0, 1.0};
  if (p.delta < 0.0) return {0.2, 1.0, 1.5, 2.5};
  return {0.5, 1.5, 0.0, 1.0};
}

std::optional<PhaseState> sample_admissible_state(const OscParams& p, const InitialBox& box, std::mt19937_64& gen,
                                                  double span, unsigned max_tries) {
  std::uniform_real_distribution<double> ydist(box.y_lo, box.y_hi);
  std::uniform_real_distribution<double> udist(box.u_abs_lo, box.u_abs_hi);
  std::bernoulli_distribution sign(0.5);
  for (unsigned t = 0; t < max_tries; ++t) {
    PhaseState s{0.0, ydist(gen), udist(gen)};
    if (sign(gen)) s.u = -s.u;
    if (s.u == 0.0) continue;
    if (p.log_case()) {
      if (!(s.y > 0.0)) continue;
    } else {
      if (!(autonomous_integral(p, s) > 0.0)) continue;
      if (nonautonomous_integral_checked(p, s).status != IntegralStatus::Ok) continue;
    }
    if (!integrate_oscillator(p, s, s.x + span).completed()) continue;
    return s;
  }
  return std::nullopt;
}

}  // namespace superosc
