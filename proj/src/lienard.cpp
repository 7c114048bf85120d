#include "superosc/lienard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/roots.hpp>

#include "superosc/numkit/errors.hpp"

namespace superosc {

using numkit::Expr;
using numkit::Rational;

namespace {

const Expr kXi = Expr::variable("xi");
const Expr kW = Expr::variable("w");

Rational exact_or_throw(double x, const char* what) {
  try {
    return numkit::rational_from_double(x, 10'000);
  } catch (const DomainError&) {
    throw DomainError(std::string(what) + " must be rational");
  }
}

bool is_one_of(double x, std::initializer_list<double> values) {
  return std::any_of(values.begin(), values.end(), [x](double v) { return std::abs(x - v) < 1e-12; });
}

struct MJet {
  double M, M1, M2, M3, M4;
};

MJet m_jet(const Expr& M, double w) {
  MJet j{};
  j.M = numkit::evaluate(M, "w", w);
  Expr d = M;
  double* slots[] = {&j.M1, &j.M2, &j.M3, &j.M4};
  for (double* slot : slots) {
    d = numkit::diff_expr(d, "w");
    *slot = numkit::evaluate(d, "w", w);
  }
  return j;
}

double m_equation(const Expr& M, double n, double w, bool homogeneous) {
  const auto [m, m1, m2, m3, m4] = m_jet(M, w);
  const double second = homogeneous ? 4.0 * (n - 1) * (n - 1) * m * m1 * m1 * m3 * m3
                                    : 4.0 * (n - 1) * (n - 1) * m * m1 * m1 * m2 * m2;
  return 4.0 * n * m1 * m1 * (2 * n * m1 * m1 + m * m2 + 2 * m1 * m1 - n * m * m2) * m4 + second -
         4.0 * m2 * m1 * (14 * m1 * m1 * n * n - 3 * m * n * n * m2 + 10 * m1 * m1 * n + 3 * m * m2) * m3 +
         3.0 * (5 * n + 3) * m2 * m2 * m2 * (4 * m1 * m1 * n + m * m2 - n * m * m2);
}

PhaseState mapped_phase(const LienardFamily& fam, const LienardState& s) {
  const MapJet j = fam.map.at(s.xi, s.w);
  return {j.G, j.F, mapped_slope(j, s.w_xi)};
}

LienardState state_of(const numkit::Trajectory& traj, double xi) {
  const auto v = traj(xi);
  return {xi, v[0], v[1]};
}

}  // namespace

double LienardSpec::f_at(double w) const { return numkit::evaluate(f, "w", w); }
double LienardSpec::g_at(double w) const { return numkit::evaluate(g, "w", w); }

PointMap::PointMap(Expr F, Expr G, numkit::EvalOptions options) : options_(options) {
  auto fill = [](std::array<Expr, 6>& slot, const Expr& e) {
    slot[0] = e;
    slot[1] = numkit::diff_expr(e, "xi");
    slot[2] = numkit::diff_expr(e, "w");
    slot[3] = numkit::diff_expr(slot[1], "xi");
    slot[4] = numkit::diff_expr(slot[1], "w");
    slot[5] = numkit::diff_expr(slot[2], "w");
  };
  for (const auto& e : {F, G}) {
    for (const auto& v : numkit::free_variables(e)) {
      if (v != "xi" && v != "w") throw DomainError("point map may only depend on xi and w, got " + v);
    }
  }
  fill(F_, F);
  fill(G_, G);
}

MapJet PointMap::at(double xi, double w) const {
  const numkit::Env env{{"xi", xi}, {"w", w}};
  std::array<double, 6> f{}, g{};
  for (std::size_t i = 0; i < 6; ++i) {
    f[i] = numkit::evaluate(F_[i], env, options_);
    g[i] = numkit::evaluate(G_[i], env, options_);
  }
  return {f[0], f[1], f[2], f[3], f[4], f[5], g[0], g[1], g[2], g[3], g[4], g[5]};
}

Expr coefficient(double x) {
  try {
    return Expr::constant(numkit::rational_from_double(x, 10'000));
  } catch (const DomainError&) {
    return Expr::real(x);
  }
}

LienardSpec duffing(double n, double alpha, double delta) {
  if (is_one_of(n, {-3.0, -1.0, 0.0, 1.0})) throw DomainError("Duffing family excludes n in {-3, -1, 0, 1}");
  if (alpha == 0.0 || delta == 0.0) throw DomainError("Duffing family needs alpha != 0 and delta != 0");
  const Rational rn = exact_or_throw(n, "n");
  const double lin = 2.0 * (n + 1) * alpha * alpha / ((n + 3) * (n + 3));
  return {coefficient(alpha), coefficient(lin) * kW + coefficient(delta) * numkit::pow(kW, rn), "duffing",
          {{"n", n}, {"alpha", alpha}, {"delta", delta}}};
}

LienardFamily caseII_family(double n, double alpha, double delta) {
  LienardSpec spec = duffing(n, alpha, delta);
  spec.family = "caseII";
  // (n+1)^{-1/(n-1)} is generally irrational.
  const double scale = std::pow(n + 1, -1.0 / (n - 1));
  if (!std::isfinite(scale)) throw DomainError("caseII family needs (n+1)^{-1/(n-1)} real");
  Expr F = coefficient(scale) * kW * numkit::exp(coefficient(2.0 * alpha / (n + 3)) * kXi);
  Expr G = coefficient((n + 3) / (alpha * (n - 1))) * numkit::exp(coefficient(-alpha * (n - 1) / (n + 3)) * kXi);
  return {std::move(spec), PointMap(F, G), OscParams::make(n, delta)};
}

LienardFamily caseIII_family(double delta) {
  if (delta == 0.0) throw DomainError("caseIII family needs delta != 0");
  LienardSpec spec{Expr::constant(0), -kW - coefficient(delta) * numkit::pow(kW, Rational(-3)), "caseIII",
                   {{"delta", delta}}};
  Expr F = Expr::constant(2) * numkit::exp(kXi) * kW;
  Expr G = Expr::real(std::sqrt(2.0)) * numkit::exp(Expr::constant(2) * kXi);
  return {std::move(spec), PointMap(F, G), OscParams::make(-3.0, delta)};
}

LienardFamily caseI_family(const Expr& M, double C1, double n, double delta, numkit::EvalOptions options) {
  if (is_one_of(n, {-1.0, 0.0, 1.0})) throw DomainError("caseI family excludes n in {-1, 0, 1}");
  if (C1 == 0.0 || delta == 0.0) throw DomainError("caseI family needs C1 != 0 and delta != 0");
  for (const auto& v : numkit::free_variables(M)) {
    if (v != "w") throw DomainError("M may only depend on w, got " + v);
  }
  const Rational rn = exact_or_throw(n, "n");
  const Expr M1 = numkit::diff_expr(M, "w");
  const Expr M2 = numkit::diff_expr(M1, "w");
  const Expr M3 = numkit::diff_expr(M2, "w");
  const Expr c1 = coefficient(C1);

  Expr f = coefficient(2.0 * C1 * n / (n - 1)) - coefficient(1.5 * C1) * M * M2 / numkit::pow(M1, Rational(2));
  Expr g = coefficient(C1 * C1 * (n + 1) / (n - 1)) * M / M1 -
           coefficient(0.5 * C1 * C1) * numkit::pow(M, Rational(2)) * M2 / numkit::pow(M1, Rational(3));
  Expr radicand = -numkit::exp(coefficient(-2.0 * C1) * kXi) *
                  (Expr::constant(2) * M1 * M3 - Expr::constant(3) * numkit::pow(M2, Rational(2))) /
                  (coefficient(4.0 * n * delta * (n + 1)) * numkit::pow(M1, Rational(4)));
  Expr F = numkit::pow(radicand, Rational(1) / (rn - Rational(1)));
  Expr G = numkit::exp(c1 * kXi) * M;
  LienardSpec spec{std::move(f), std::move(g), "caseI", {{"C1", C1}, {"n", n}, {"delta", delta}}};
  return {std::move(spec), PointMap(F, G, options), OscParams::make(n, delta, options.odd_denominator)};
}

double caseI_printed_radicand(const Expr& M, double C1, double n, double delta, double xi, double w) {
  const auto j = m_jet(M, w);
  return std::exp(-2.0 * C1 * xi) * (2.0 * j.M1 * j.M3 - 3.0 * j.M2 * j.M2) / (4.0 * n * delta * (n + 1) * j.M1 * j.M1);
}

double m_equation_residual(const Expr& M, double n, double w) { return m_equation(M, n, w, false); }

double m_equation_residual_homogeneous(const Expr& M, double n, double w) { return m_equation(M, n, w, true); }

Expr dvdp_M(double m, double mu) {
  const Rational rm = exact_or_throw(m, "m");
  return Expr::constant(1) + coefficient(3.0 * mu * (m + 1) / (2.0 * (m + 2))) * numkit::pow(kW, -rm);
}

LienardFamily dvdp_example(double m, double mu) {
  if (is_one_of(m, {-1.0, -2.0, -1.0 / 3.0, 0.0})) throw DomainError("example excludes m in {-1, -2, -1/3, 0}");
  if (mu == 0.0) throw DomainError("example needs mu != 0");
  const Rational rm = exact_or_throw(m, "m");
  const Rational one(1);
  Expr f = numkit::pow(kW, rm) + coefficient(mu);
  Expr g = coefficient(2.0 / (9.0 * (m + 1))) * numkit::pow(kW, Rational(2) * rm + one) +
           coefficient(mu / (m + 2)) * numkit::pow(kW, rm + one) +
           coefficient((m + 1) * mu * mu / ((m + 2) * (m + 2))) * kW;
  const double base = 3.0 * std::sqrt(2.0) * mu * m * (m + 1) / ((m + 2) * (3 * m + 1));
  const Rational power = (Rational(3) * rm + one) / (Rational(2) * rm);
  Expr F = numkit::pow(Expr::real(base) * numkit::pow(kW, -rm), power) *
           numkit::exp(coefficient(-mu * (3 * m + 1) / (2 * m + 4)) * kXi);
  Expr G = numkit::exp(coefficient(-mu * m / (m + 2)) * kXi) *
           (coefficient(3.0 * mu * (m + 1) / (2.0 * (m + 2))) * numkit::pow(kW, -rm) + Expr::constant(1));
  LienardSpec spec{std::move(f), std::move(g), "dvdp", {{"m", m}, {"mu", mu}}};
  const double n = (1.0 - m) / (3.0 * m + 1.0);
  OscParams osc;
  osc.n = n;
  osc.delta = -1.0;
  if (!is_one_of(n, {0.0, 1.0})) osc = OscParams::make(n, -1.0);
  return {std::move(spec), PointMap(F, G), osc};
}

DuffingShift duffing_shift(Rational alpha, Rational delta) {
  if (alpha == Rational(0) || delta == Rational(0)) throw DomainError("shift needs alpha != 0 and delta != 0");
  const Rational lin = -Rational(6, 25) * alpha * alpha;
  DuffingShift out;
  out.spec = {Expr::constant(alpha), Expr::constant(lin) * kW + Expr::constant(delta) * numkit::pow(kW, Rational(2)),
              "duffing_shifted", {{"alpha", numkit::to_double(alpha)}, {"delta", numkit::to_double(delta)}}};
  out.shift = Rational(6, 25) * alpha * alpha / delta;
  const Rational s = out.shift;
  // g(w + s) for g = lin w + delta w^2.
  out.shifted = {lin * s + delta * s * s, lin + Rational(2) * delta * s, delta};
  // duffing(2, alpha, delta): 2 (n+1) alpha^2/(n+3)^2 w + delta w^2 at n = 2.
  out.target = {Rational(0), Rational(6, 25) * alpha * alpha, delta};
  return out;
}

double mapped_slope(const MapJet& j, double w_xi) {
  const double den = j.G_xi + j.G_w * w_xi;
  if (den == 0.0) throw DomainError("mapped curve has dx/dxi = 0");
  return (j.F_xi + j.F_w * w_xi) / den;
}

double J1(const LienardFamily& fam, const LienardState& s) {
  if (fam.osc.log_case()) return log_autonomous_integral(fam.osc.delta, mapped_phase(fam, s));
  return autonomous_integral(fam.osc, mapped_phase(fam, s));
}

double J2(const LienardFamily& fam, const LienardState& s) {
  return nonautonomous_integral(fam.osc, mapped_phase(fam, s));
}

numkit::Trajectory integrate_lienard(const LienardSpec& spec, const LienardState& s0, double span, double rtol,
                                     double atol) {
  numkit::OdeProblem prob;
  prob.rhs = [&spec](double, std::span<const double> y, std::span<double> dy) {
    try {
      dy[0] = y[1];
      dy[1] = -spec.f_at(y[0]) * y[1] - spec.g_at(y[0]);
    } catch (const DomainError&) {
      dy[0] = dy[1] = std::numeric_limits<double>::quiet_NaN();
    }
  };
  prob.y0 = {s0.w, s0.w_xi};
  prob.t0 = s0.xi;
  prob.t1 = s0.xi + span;
  prob.rtol = rtol;
  prob.atol = atol;
  return numkit::integrate_ode(prob);
}

double equivalence_residual(const LienardFamily& fam, const LienardState& s) {
  const MapJet j = fam.map.at(s.xi, s.w);
  const double v = s.w_xi;
  const double a = -fam.spec.f_at(s.w) * v - fam.spec.g_at(s.w);  // w_xixi
  const double P = j.F_xi + j.F_w * v;
  const double Q = j.G_xi + j.G_w * v;
  if (Q == 0.0) throw DomainError("mapped curve has dx/dxi = 0");
  const double dP = j.F_xixi + 2.0 * j.F_xiw * v + j.F_ww * v * v + j.F_w * a;
  const double dQ = j.G_xixi + 2.0 * j.G_xiw * v + j.G_ww * v * v + j.G_w * a;
  const double y_xx = (dP * Q - P * dQ) / (Q * Q * Q);
  return y_xx - acceleration(fam.osc, j.F);
}

EquivalenceReport verify_equivalence(const LienardFamily& fam, const LienardState& s0, double span,
                                     std::size_t dense_samples) {
  EquivalenceReport out;
  const auto traj = integrate_lienard(fam.spec, s0, span);
  out.completed = traj.completed();
  out.diagnostic = traj.diagnostic();
  if (!out.completed) return out;

  const bool terminating = transcendental_terminates(fam.osc.n);
  std::vector<double> j1, j2, key;
  out.min_abs_jacobian = std::numeric_limits<double>::infinity();
  for (double xi : traj.uniform_times(dense_samples)) {
    const LienardState s = state_of(traj, xi);
    const MapJet j = fam.map.at(s.xi, s.w);
    out.min_abs_jacobian = std::min(out.min_abs_jacobian, std::abs(j.jacobian()));
    const double r = std::abs(equivalence_residual(fam, s));
    out.max_residual = std::max(out.max_residual, r);
    out.max_relative_residual =
        std::max(out.max_relative_residual, r / std::max(1.0, std::abs(acceleration(fam.osc, j.F))));
    ++out.samples;
    if (fam.osc.n == 0.0 || fam.osc.n == 1.0) continue;
    j1.push_back(J1(fam, s));
    if (fam.osc.log_case()) continue;
    const double slope = mapped_slope(j, s.w_xi);
    try {
      j2.push_back(J2(fam, s));
      key.push_back(terminating ? 1.0 : slope);
    } catch (const DomainError&) {
      ++out.J2_excluded;
    }
  }
  if (!j1.empty()) out.J1_drift = drift(j1);
  if (!j2.empty()) out.J2_drift = segmented_drift(j2, key);
  return out;
}

AutonomyReport autonomy_recovery(const LienardFamily& fam, const LienardState& s0, double span, double xi_lo,
                                 double xi_hi, std::size_t samples) {
  AutonomyReport out;
  const auto traj = integrate_lienard(fam.spec, s0, span);
  if (!traj.completed()) throw NumericalError("Lienard integration failed: " + traj.diagnostic());
  const double level = J1(fam, s0);
  constexpr std::size_t kScan = 400;

  const bool terminating = transcendental_terminates(fam.osc.n);
  std::vector<double> values, key;
  for (double xi : traj.uniform_times(samples)) {
    const LienardState s = state_of(traj, xi);
    auto excess = [&](double t) {
      try {
        return J1(fam, {t, s.w, s.w_xi}) - level;
      } catch (const DomainError&) {
        return std::numeric_limits<double>::quiet_NaN();
      }
    };
    std::vector<double> roots;
    double prev_t = xi_lo;
    double prev = excess(prev_t);
    for (std::size_t i = 1; i <= kScan; ++i) {
      const double t = xi_lo + (xi_hi - xi_lo) * static_cast<double>(i) / kScan;
      const double cur = excess(t);
      if (std::isfinite(prev) && std::isfinite(cur) && (prev == 0.0 || prev * cur < 0.0)) {
        if (prev == 0.0) {
          roots.push_back(prev_t);
        } else {
          std::uintmax_t iters = 100;
          const auto bracket = boost::math::tools::toms748_solve(
              excess, prev_t, t, prev, cur, boost::math::tools::eps_tolerance<double>(50), iters);
          roots.push_back(0.5 * (bracket.first + bracket.second));
        }
      }
      prev_t = t;
      prev = cur;
    }
    ++out.samples;
    if (roots.size() != 1) {
      ++out.unresolved;
      continue;
    }
    out.max_xi_error = std::max(out.max_xi_error, std::abs(roots.front() - xi));
    try {
      const LienardState r{roots.front(), s.w, s.w_xi};
      values.push_back(J2(fam, r));
      key.push_back(terminating ? 1.0 : mapped_slope(fam.map.at(r.xi, r.w), r.w_xi));
    } catch (const DomainError&) {
      ++out.unresolved;
    }
  }
  out.drift = segmented_drift(values, key);
  return out;
}

}  // namespace superosc
