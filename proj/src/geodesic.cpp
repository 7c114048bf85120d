#include "superosc/geodesic.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "superosc/numkit/errors.hpp"
#include "superosc/numkit/special.hpp"

namespace superosc {

using numkit::Expr;
using numkit::parse_expr;

MetricSpec MetricSpec::make(double C1, double C2, const OscParams& osc) {
  if (!std::isfinite(C1) || !std::isfinite(C2)) throw DomainError("MetricSpec: non-finite constant");
  if (C1 == 0.0) throw DomainError("MetricSpec: C1 must be nonzero");
  return MetricSpec{C1, C2, osc};
}

MetricSpec n_minus1_metric(double C1, double C2, double delta) {
  return MetricSpec::make(C1, C2, OscParams::make(-1.0, delta));
}

namespace {

/// 2 delta y^{n+1}, or 2 delta ln y on the log branch.
double potential(const MetricSpec& m, double y) {
  if (m.osc.log_case()) {
    if (!(y > 0.0)) throw DomainError("metric: log branch requires y > 0");
    return 2.0 * m.osc.delta * std::log(y);
  }
  return 2.0 * m.osc.delta * osc_power(m.osc, y, m.osc.n + 1.0);
}

double potential_dy(const MetricSpec& m, double y) {
  if (m.osc.log_case()) return 2.0 * m.osc.delta / y;
  return 2.0 * m.osc.delta * (m.osc.n + 1.0) * osc_power(m.osc, y, m.osc.n);
}

/// Overall factor of H: C1 on the log branch, 1 otherwise.
double hamiltonian_scale(const MetricSpec& m) { return m.osc.log_case() ? m.C1 : 1.0; }

void require_p1(const CoState& s, const char* what) {
  if (s.p1 == 0.0) throw DomainError(std::string(what) + ": requires p1 != 0");
}

}  // namespace

double conformal_factor(const MetricSpec& m, double y) { return m.C1 * potential(m, y) + m.C2; }

double conformal_factor_dy(const MetricSpec& m, double y) { return m.C1 * potential_dy(m, y); }

DiagonalMetric metric_components(const MetricSpec& m, double y) {
  const double a = conformal_factor(m, y);
  if (!(a > 0.0) || !(m.C1 > 0.0)) {
    std::ostringstream msg;
    msg << "metric_components: not positive-definite at y = " << y << " (A = " << a << ", C1 = " << m.C1 << ")";
    throw DomainError(msg.str());
  }
  const double ay = conformal_factor_dy(m, y);
  const double c1sq = m.C1 * m.C1;
  return {1.0 / (c1sq * a), 1.0 / (m.C1 * a * a), -ay / (c1sq * a * a), -2.0 * ay / (m.C1 * a * a * a)};
}

double hamiltonian(const MetricSpec& m, const CoState& s) {
  const double a = conformal_factor(m, s.y);
  return hamiltonian_scale(m) * a * (m.C1 * s.p1 * s.p1 / 2.0 + a * s.p2 * s.p2 / 2.0);
}

PhaseGradient hamiltonian_gradient(const MetricSpec& m, const CoState& s) {
  const double a = conformal_factor(m, s.y);
  const double ay = conformal_factor_dy(m, s.y);
  const double k = hamiltonian_scale(m);
  return {0.0, k * ay * (m.C1 * s.p1 * s.p1 / 2.0 + a * s.p2 * s.p2), k * a * m.C1 * s.p1, k * a * a * s.p2};
}

numkit::Trajectory geodesic_flow(const MetricSpec& m, const CoState& s0, double span, double rtol, double atol,
                                 std::size_t max_steps) {
  numkit::OdeProblem prob;
  prob.rhs = [m](double, std::span<const double> q, std::span<double> dq) {
    try {
      const auto g = hamiltonian_gradient(m, {q[0], q[1], q[2], q[3]});
      dq[0] = g[2];
      dq[1] = g[3];
      dq[2] = -g[0];
      dq[3] = -g[1];
    } catch (const DomainError&) {
      for (auto& v : dq) v = std::nan("");
    }
  };
  prob.y0 = {s0.x, s0.y, s0.p1, s0.p2};
  prob.t0 = 0.0;
  prob.t1 = span;
  prob.rtol = rtol;
  prob.atol = atol;
  prob.max_steps = max_steps;
  return numkit::integrate_ode(prob);
}

CoState costate_at(const numkit::Trajectory& traj, std::size_t i) {
  const auto q = traj.state(i);
  return {q[0], q[1], q[2], q[3]};
}

CoState costate_at(const numkit::Trajectory& traj, double t) {
  const auto q = traj(t);
  return {q[0], q[1], q[2], q[3]};
}

double lifted_slope(const MetricSpec& m, const CoState& s) {
  require_p1(s, "lifted_slope");
  return conformal_factor(m, s.y) * s.p2 / (m.C1 * s.p1);
}

double integral_R(const MetricSpec& m, const CoState& s) {
  const double u = lifted_slope(m, s);
  return u * u + potential(m, s.y);
}

PhaseGradient integral_R_gradient(const MetricSpec& m, const CoState& s) {
  require_p1(s, "integral_R_gradient");
  const double a = conformal_factor(m, s.y);
  const double ay = conformal_factor_dy(m, s.y);
  const double q = s.p2 / (m.C1 * s.p1);
  return {0.0, 2.0 * a * ay * q * q + potential_dy(m, s.y), -2.0 * a * a * q * q / s.p1, 2.0 * a * a * q / (m.C1 * s.p1)};
}

double integral_T(const MetricSpec& m, const CoState& s) {
  if (m.osc.log_case()) throw DomainError("integral_T: n = -1 uses lifted_log_integral");
  require_p1(s, "integral_T");
  const double w = potential(m, s.y);
  const double v = (1.0 + m.C2 / (m.C1 * w)) * s.p2 / s.p1;
  if (v == 0.0) return s.x;
  const double tail = w * v * v;
  const double den = 1.0 + tail;
  if (den == 0.0) throw BranchError("integral_T: 1 + 2 delta y^(n+1) v^2 = 0 (degenerate level set)");
  const auto [a, b, c] = transcendental_parameters(m.osc.n);
  return s.x - s.y * v / den * numkit::hyp2f1(a, b, c, 1.0 / den, tail / den);
}

double integral_Tk(const MetricSpec& m, unsigned k, const CoState& s) {
  const double expected = numkit::to_double(polynomial_exponent(k));
  if (std::abs(m.osc.n - expected) > 1e-12) {
    std::ostringstream msg;
    msg << "integral_Tk: k = " << k << " requires n = " << numkit::to_string(polynomial_exponent(k)) << ", got "
        << m.osc.n;
    throw DomainError(msg.str());
  }
  const double delta = m.osc.delta;
  const double yr = osc_power(m.osc, s.y, -2.0 / (2.0 * k + 1.0));
  const double vt = (m.C2 / m.C1 + 2.0 * delta * yr) * s.p2;
  const double inner = vt * vt + 2.0 * delta * yr * s.p1 * s.p1;
  double sum = 0.0;
  double two_delta_s = 1.0;
  double yr_s = 1.0;
  double factorial = 1.0;
  double p1_pow = s.p1;
  for (unsigned j = 0; j <= k; ++j) {
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    sum += sign * numkit::binomial(k, j) * two_delta_s * factorial / numkit::pochhammer(0.5 - k, j) * yr_s *
           std::pow(inner, static_cast<double>(k - j)) * p1_pow;
    two_delta_s *= 2.0 * delta;
    yr_s *= yr;
    factorial *= j + 1.0;
    p1_pow *= s.p1 * s.p1;
  }
  return std::pow(inner, static_cast<double>(k + 1)) * s.x - s.y * vt * sum;
}

double lifted_log_integral(const MetricSpec& m, const CoState& s) {
  if (!m.osc.log_case()) throw DomainError("lifted_log_integral: requires n = -1");
  return log_erf_integral(m.osc.delta, {s.x, s.y, lifted_slope(m, s)});
}

double curvature(const MetricSpec& m, double y) {
  if (m.osc.log_case()) throw DomainError("curvature: closed form covers n != -1 only");
  const double n = m.osc.n;
  const double d = m.osc.delta;
  return (n + 1.0) * m.C1 * m.C1 * d *
         (m.C2 * n * osc_power(m.osc, y, n - 1.0) + d * m.C1 * (n - 1.0) * osc_power(m.osc, y, 2.0 * n));
}

double brioschi_curvature(const MetricSpec& m, double y, double h) {
  const auto d5 = [h](const auto& f, double t) {
    return (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h);
  };
  const auto e = [&](double t) { return metric_components(m, t).g11; };
  const auto root_eg = [&](double t) {
    const auto c = metric_components(m, t);
    return std::sqrt(c.g11 * c.g22);
  };
  const auto q = [&](double t) { return d5(e, t) / root_eg(t); };
  return -d5(q, y) / (2.0 * root_eg(y));
}

double poisson_bracket(const PhaseGradient& f, const PhaseGradient& g) {
  return f[0] * g[2] - f[2] * g[0] + f[1] * g[3] - f[3] * g[1];
}

double normalized_bracket(const PhaseGradient& f, const PhaseGradient& g) {
  double nf = 0.0, ng = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    nf += f[i] * f[i];
    ng += g[i] * g[i];
  }
  if (nf == 0.0 || ng == 0.0) return 0.0;
  return poisson_bracket(f, g) / std::sqrt(nf * ng);
}

namespace {

const char* const kPhaseVars[4] = {"x", "y", "p1", "p2"};

numkit::Env phase_env(const CoState& s) { return {{"x", s.x}, {"y", s.y}, {"p1", s.p1}, {"p2", s.p2}}; }

}  // namespace

PhaseFunction::PhaseFunction(Expr e) : expr_(std::move(e)) {
  for (std::size_t i = 0; i < 4; ++i) grad_[i] = numkit::diff_expr(expr_, kPhaseVars[i]);
}

double PhaseFunction::value(const CoState& s) const { return numkit::evaluate(expr_, phase_env(s)); }

PhaseGradient PhaseFunction::gradient(const CoState& s) const {
  const auto env = phase_env(s);
  PhaseGradient g{};
  for (std::size_t i = 0; i < 4; ++i) g[i] = numkit::evaluate(grad_[i], env);
  return g;
}

QuarticExample quartic_example() {
  const char* tail = " - 3*y^(-1/3)*p2*p1^3 + 4*x*y^(-2)*p2^2*p1^2 - 2*y^(-1)*p1*p2^3 + 4*x*y^(-8/3)*p2^4";
  return {parse_expr("p1^2*y^(-2/3) + 2*p2^2*y^(-4/3)"), parse_expr(std::string("x*y^(-4/3)*p1^4") + tail),
          parse_expr(std::string("x*y^(-2/3)*p1^4") + tail)};
}

Expr sextic_integral_base() {
  return parse_expr(
      "x*y^(-6/5)*p1^6 - 5*y^(-1/5)*p2*p1^5 + 6*x*y^(-8/5)*p2^2*p1^4 - 20/3*y^(-3/5)*p2^3*p1^3"
      " + 12*x*y^(-2)*p2^4*p1^2 + 8*x*y^(-12/5)*p2^6");
}

Expr sextic_garbled_monomial() { return parse_expr("p2^5*p1*y^(-1)"); }

SexticExample sextic_example(double p2p1_coefficient) {
  const double r = std::round(p2p1_coefficient);
  const Expr c = (r == p2p1_coefficient && std::abs(r) < 1e15) ? Expr::constant(static_cast<long long>(r))
                                                               : Expr::real(p2p1_coefficient);
  return {parse_expr("p1^2*y^(-2/5) + 2*p2^2*y^(-4/5)"), sextic_integral_base() + c * sextic_garbled_monomial()};
}

CoefficientFit solve_sextic_coefficient(const std::vector<CoState>& states) {
  if (states.empty()) throw DomainError("solve_sextic_coefficient: no states");
  const PhaseFunction h(sextic_example(0.0).hamiltonian);
  const PhaseFunction base(sextic_integral_base());
  const PhaseFunction mono(sextic_garbled_monomial());
  double num = 0.0, den = 0.0;
  for (const auto& s : states) {
    const auto gh = h.gradient(s);
    const double b0 = poisson_bracket(base.gradient(s), gh);
    const double bq = poisson_bracket(mono.gradient(s), gh);
    num += b0 * bq;
    den += bq * bq;
  }
  if (den == 0.0) throw NumericalError("solve_sextic_coefficient: bracket does not depend on the coefficient");
  CoefficientFit fit;
  fit.coefficient = -num / den;
  for (const auto& s : states) {
    const auto gb = base.gradient(s);
    const auto gq = mono.gradient(s);
    PhaseGradient gt{};
    for (std::size_t i = 0; i < 4; ++i) gt[i] = gb[i] + fit.coefficient * gq[i];
    fit.max_residual = std::max(fit.max_residual, std::abs(normalized_bracket(gt, h.gradient(s))));
  }
  return fit;
}

std::vector<double> singular_values(const std::vector<PhaseGradient>& rows) {
  Eigen::MatrixXd j(static_cast<Eigen::Index>(rows.size()), 4);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < 4; ++c) j(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(j).singularValues();
  return {sv.data(), sv.data() + sv.size()};
}

double projection_residual(const MetricSpec& m, const numkit::Trajectory& traj, double t, double h) {
  const auto slope = [&](double tt) { return lifted_slope(m, costate_at(traj, tt)); };
  const auto s = costate_at(traj, t);
  const double dslope_dt = (slope(t + h) - slope(t - h)) / (2.0 * h);
  const double dx_dt = hamiltonian_gradient(m, s)[2];
  return dslope_dt / dx_dt - acceleration(m.osc, s.y);
}

GeodesicDrifts geodesic_drifts(const MetricSpec& m, const CoState& s0, double span, double rtol,
                               std::size_t dense_samples) {
  GeodesicDrifts out;
  const auto traj = geodesic_flow(m, s0, span, rtol);
  out.completed = traj.completed();
  out.diagnostic = traj.diagnostic();

  std::vector<std::pair<double, CoState>> pts;
  for (std::size_t i = 0; i < traj.size(); ++i) pts.emplace_back(traj.times()[i], costate_at(traj, i));
  if (traj.size() > 1) {
    for (double t : traj.uniform_times(dense_samples)) pts.emplace_back(t, costate_at(traj, t));
  }
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  out.samples = pts.size();

  out.k = polynomial_index(m.osc.n);
  const bool with_p1 = s0.p1 != 0.0;
  std::vector<double> ls, hs, rs, ts, keys, tks, logs;
  for (const auto& [t, s] : pts) {
    ls.push_back(integral_L(s));
    hs.push_back(hamiltonian(m, s));
    if (!with_p1) continue;
    rs.push_back(integral_R(m, s));
    if (m.osc.log_case()) {
      if (m.osc.delta > 0.0) logs.push_back(lifted_log_integral(m, s));
      continue;
    }
    const double u = lifted_slope(m, s);
    if (u != 0.0) {
      try {
        ts.push_back(integral_T(m, s));
        keys.push_back(u);
      } catch (const BranchError&) {
        ++out.excluded;
      }
    }
    if (out.k) tks.push_back(integral_Tk(m, *out.k, s));
  }
  out.L = drift(ls);
  out.H = drift(hs);
  if (!rs.empty()) out.R = drift(rs);
  if (!ts.empty()) out.T = transcendental_terminates(m.osc.n) ? drift(ts) : segmented_drift(ts, keys);
  if (!tks.empty()) out.Tk = drift(tks);
  if (!logs.empty()) out.lifted_log = drift(logs);
  return out;
}

std::optional<CoState> sample_costate(const MetricSpec& m, const CoStateBox& box, std::mt19937_64& gen, double span,
                                      unsigned max_tries) {
  std::uniform_real_distribution<double> ydist(box.y_lo, box.y_hi);
  std::uniform_real_distribution<double> p1dist(box.p1_abs_lo, box.p1_abs_hi);
  std::uniform_real_distribution<double> p2dist(-box.p2_abs_hi, box.p2_abs_hi);
  std::bernoulli_distribution sign(0.5);
  for (unsigned t = 0; t < max_tries; ++t) {
    CoState s{0.0, ydist(gen), p1dist(gen), p2dist(gen)};
    if (sign(gen)) s.p1 = -s.p1;
    if (s.p1 == 0.0 || s.p2 == 0.0) continue;
    try {
      if (!(conformal_factor(m, s.y) > 0.0)) continue;
      if (!m.osc.log_case()) (void)integral_T(m, s);
    } catch (const DomainError&) {
      continue;
    }
    // Flows running into the degenerate set A = 0 crawl; cap the trial run.
    if (!geodesic_flow(m, s, span, 1e-12, 1e-13, 100'000).completed()) continue;
    return s;
  }
  return std::nullopt;
}

}  // namespace superosc
