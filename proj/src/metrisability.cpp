#include "superosc/metrisability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "superosc/numkit/errors.hpp"

namespace superosc {

using numkit::Expr;

Christoffel christoffel(const MetricJet& g) {
  const double det = g.g11 * g.g22 - g.g12 * g.g12;
  if (det == 0.0 || !std::isfinite(det)) throw DomainError("christoffel: singular metric");
  const double inv[2][2] = {{g.g22 / det, -g.g12 / det}, {-g.g12 / det, g.g11 / det}};
  // d[l][a][b] = partial_l g_ab
  const double d[2][2][2] = {{{g.g11_x, g.g12_x}, {g.g12_x, g.g22_x}}, {{g.g11_y, g.g12_y}, {g.g12_y, g.g22_y}}};
  Christoffel c;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int k = j; k < 2; ++k) {
        double s = 0.0;
        for (int l = 0; l < 2; ++l) s += inv[i][l] * (d[j][l][k] + d[k][l][j] - d[l][j][k]);
        c.gamma[i][j][k] = 0.5 * s;
        c.gamma[i][k][j] = 0.5 * s;
      }
    }
  }
  return c;
}

ProjectiveCoefficients project(const MetricJet& g) {
  const auto c = christoffel(g);
  return {c(2, 1, 1), 2.0 * c(2, 1, 2) - c(1, 1, 1), c(2, 2, 2) - 2.0 * c(1, 1, 2), -c(1, 2, 2)};
}

ProjectiveCoefficients project(const MetricTensorField& g, double x, double y) { return project(g(x, y)); }

std::array<double, 4> liouville_residual(const ProjectiveCoefficients& a, const PsiJet& p) {
  return {
      p.psi1_x + 2.0 / 3.0 * a.a1 * p.psi1 - 2.0 * a.a0 * p.psi2,
      p.psi3_y + 2.0 * a.a3 * p.psi2 - 2.0 / 3.0 * a.a2 * p.psi3,
      p.psi1_y + 2.0 * p.psi2_x + 4.0 / 3.0 * a.a2 * p.psi1 - 2.0 / 3.0 * a.a1 * p.psi2 - 2.0 * a.a0 * p.psi3,
      p.psi3_x + 2.0 * p.psi2_y + 2.0 * a.a3 * p.psi1 - 4.0 / 3.0 * a.a1 * p.psi3 + 2.0 / 3.0 * a.a2 * p.psi2,
  };
}

PsiJet psi_from_metric(const MetricJet& g) {
  const double det = g.g11 * g.g22 - g.g12 * g.g12;
  if (!(det > 0.0)) throw DomainError("psi_from_metric: det g must be positive");
  const double det_x = g.g11_x * g.g22 + g.g11 * g.g22_x - 2.0 * g.g12 * g.g12_x;
  const double det_y = g.g11_y * g.g22 + g.g11 * g.g22_y - 2.0 * g.g12 * g.g12_y;
  const double s = std::pow(det, -2.0 / 3.0);
  const double ds = -2.0 / 3.0 * s / det;
  const double s_x = ds * det_x, s_y = ds * det_y;
  return {s * g.g11,
          s * g.g12,
          s * g.g22,
          s_x * g.g11 + s * g.g11_x,
          s_x * g.g12 + s * g.g12_x,
          s_x * g.g22 + s * g.g22_x,
          s_y * g.g11 + s * g.g11_y,
          s_y * g.g12 + s * g.g12_y,
          s_y * g.g22 + s * g.g22_y};
}

MetricJet metric_from_psi(const PsiJet& p) {
  const double d = p.delta();
  if (d == 0.0 || !std::isfinite(d)) throw DomainError("metric_from_psi: Delta = 0");
  const double d_x = p.psi1_x * p.psi3 + p.psi1 * p.psi3_x - 2.0 * p.psi2 * p.psi2_x;
  const double d_y = p.psi1_y * p.psi3 + p.psi1 * p.psi3_y - 2.0 * p.psi2 * p.psi2_y;
  const double i2 = 1.0 / (d * d);
  const double i3 = 2.0 * i2 / d;
  return {p.psi1 * i2,
          p.psi2 * i2,
          p.psi3 * i2,
          p.psi1_x * i2 - p.psi1 * d_x * i3,
          p.psi2_x * i2 - p.psi2 * d_x * i3,
          p.psi3_x * i2 - p.psi3 * d_x * i3,
          p.psi1_y * i2 - p.psi1 * d_y * i3,
          p.psi2_y * i2 - p.psi2 * d_y * i3,
          p.psi3_y * i2 - p.psi3 * d_y * i3};
}

MetricTensorField metric_field(const MetricSpec& m) {
  return [m](double, double y) {
    const auto c = metric_components(m, y);
    MetricJet j;
    j.g11 = c.g11;
    j.g22 = c.g22;
    j.g11_y = c.g11_y;
    j.g22_y = c.g22_y;
    return j;
  };
}

CubicOscSpec::CubicOscSpec(Expr k, Expr h, Expr f, Expr g, double y_lo, double y_hi)
    : coeff_{std::move(k), std::move(h), std::move(f), std::move(g)}, y_lo_(y_lo), y_hi_(y_hi) {
  if (!(y_lo < y_hi) || !std::isfinite(y_lo) || !std::isfinite(y_hi)) {
    throw DomainError("CubicOscSpec: requires a finite interval y_lo < y_hi");
  }
  static const char* const names[4] = {"k", "h", "f", "g"};
  for (std::size_t i = 0; i < 4; ++i) {
    for (const auto& v : numkit::free_variables(coeff_[i])) {
      if (v != "y") throw DomainError(std::string("CubicOscSpec: coefficient ") + names[i] + " uses variable '" + v + "'");
    }
    deriv_[i] = numkit::diff_expr(coeff_[i], "y");
  }
}

CubicOscSpec CubicOscSpec::parse(const std::string& k, const std::string& h, const std::string& f,
                                 const std::string& g, double y_lo, double y_hi) {
  return {numkit::parse_expr(k), numkit::parse_expr(h), numkit::parse_expr(f), numkit::parse_expr(g), y_lo, y_hi};
}

CubicCoefficients CubicOscSpec::at(double y) const {
  const auto ev = [y](const Expr& e) { return numkit::evaluate(e, "y", y); };
  return {ev(coeff_[0]), ev(coeff_[1]), ev(coeff_[2]), ev(coeff_[3]),
          ev(deriv_[0]), ev(deriv_[1]), ev(deriv_[2]), ev(deriv_[3])};
}

ProjectiveCoefficients CubicOscSpec::projective(double y) const {
  const auto c = at(y);
  return {c.g, c.f, c.h, c.k};
}

std::string to_string(PsiCase c) {
  switch (c) {
    case PsiCase::I: return "I";
    case PsiCase::II: return "II";
    case PsiCase::III: return "III";
    case PsiCase::IV: return "IV";
    case PsiCase::V: return "V";
    case PsiCase::None: return "none";
  }
  return "none";
}

std::vector<double> chebyshev_points(double lo, double hi, std::size_t count) {
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = std::cos(std::numbers::pi * (2.0 * i + 1.0) / (2.0 * count));
    out.push_back(0.5 * (lo + hi) - 0.5 * (hi - lo) * t);
  }
  return out;
}

namespace {

/// |sum of terms| / max(1, sum |terms|).
double scaled(std::initializer_list<double> terms) {
  double s = 0.0, a = 0.0;
  for (double t : terms) {
    s += t;
    a += std::abs(t);
  }
  return std::abs(s) / std::max(1.0, a);
}

double relation_II(const CubicCoefficients& c) {
  return scaled({2.0 * c.f * c.f * c.f, -9.0 * c.h * c.f * c.g, 9.0 * c.g * c.f_y, -9.0 * c.f * c.g_y});
}

double relation_I(const CubicCoefficients& c) {
  return scaled({27.0 * c.k * c.g * c.g, -9.0 * c.h * c.f * c.g, 2.0 * c.f * c.f * c.f, 9.0 * c.g * c.f_y,
                 -9.0 * c.f * c.g_y});
}

}  // namespace

Classification classify(const CubicOscSpec& spec, const std::vector<double>& samples, double tol) {
  if (samples.empty()) throw DomainError("classify: no samples");
  const PsiCase order[5] = {PsiCase::III, PsiCase::IV, PsiCase::V, PsiCase::II, PsiCase::I};
  Classification out;
  out.samples = samples.size();
  std::vector<CubicCoefficients> vals;
  vals.reserve(samples.size());
  for (double y : samples) vals.push_back(spec.at(y));
  const auto zero = [](double v) { return scaled({v}); };
  const auto nonzero = [tol](double v) { return std::abs(v) > tol; };

  for (PsiCase which : order) {
    CaseCheck chk;
    chk.which = which;
    chk.side_conditions = true;
    for (const auto& c : vals) {
      double r = 0.0;
      bool side = true;
      switch (which) {
        case PsiCase::III:
          r = std::max(zero(c.k), zero(c.f));
          side = nonzero(c.g);
          break;
        case PsiCase::IV:
          r = std::max(zero(c.f), zero(c.g));
          side = nonzero(c.k);
          break;
        case PsiCase::V:
          r = std::max({zero(c.f), zero(c.g), zero(c.k)});
          side = nonzero(c.h);
          break;
        case PsiCase::II:
          r = std::max(relation_II(c), zero(c.k));
          side = nonzero(c.f) && nonzero(c.g);
          break;
        case PsiCase::I:
          r = relation_I(c);
          side = nonzero(c.f) && nonzero(c.k);
          break;
        case PsiCase::None: break;
      }
      chk.residual = std::max(chk.residual, r);
      chk.side_conditions = chk.side_conditions && side;
    }
    out.checks.push_back(chk);
    if (out.which == PsiCase::None && chk.holds(tol)) out.which = which;
  }
  return out;
}

Classification classify(const CubicOscSpec& c, double tol) {
  return classify(c, chebyshev_points(c.y_lo(), c.y_hi()), tol);
}

namespace {

/// Right-hand side of the case's system; state layouts are noted per case.
void psi_rhs(PsiCase which, const CubicCoefficients& c, std::span<const double> q, std::span<double> dq) {
  switch (which) {
    case PsiCase::III:  // (psi1, psi3)
      dq[0] = 2.0 * c.g * q[1] - 4.0 * c.h * q[0] / 3.0;
      dq[1] = 2.0 * c.h * q[1] / 3.0;
      break;
    case PsiCase::IV:
    case PsiCase::V:  // (psi1, psi2, psi3)
      dq[0] = -4.0 * c.h * q[0] / 3.0;
      dq[1] = -c.k * q[0] - c.h * q[1] / 3.0;
      dq[2] = 2.0 * c.h * q[2] / 3.0 - 2.0 * c.k * q[1];
      break;
    case PsiCase::II:  // (psi2, psi3)
      dq[0] = (2.0 * c.f * q[1] - c.h * q[0]) / 3.0;
      dq[1] = 2.0 * c.h * q[1] / 3.0;
      break;
    case PsiCase::I: {  // (psi3, psi3')
      const double b = c.f * c.h * c.k - 9.0 * c.g * c.k * c.k + 3.0 * c.f * c.k_y;
      const double lin =
          2.0 * (2.0 * c.k * c.f * c.h * c.h - 6.0 * c.f * c.f * c.k * c.k + 3.0 * c.k * c.f * c.h_y - b * c.h);
      dq[0] = q[1];
      dq[1] = (3.0 * b * q[1] + lin * q[0]) / (9.0 * c.f * c.k);
      break;
    }
    case PsiCase::None: break;
  }
}

PsiJet psi_jet(PsiCase which, const CubicCoefficients& c, const std::vector<double>& q) {
  std::vector<double> dq(q.size());
  psi_rhs(which, c, q, dq);
  PsiJet j;
  const auto algebraic_psi1 = [&] {
    j.psi1 = 3.0 * c.g * j.psi2 / c.f;
    j.psi1_y = 3.0 * (c.g_y * j.psi2 + c.g * j.psi2_y) / c.f - 3.0 * c.g * j.psi2 * c.f_y / (c.f * c.f);
  };
  switch (which) {
    case PsiCase::III:
      j.psi1 = q[0];
      j.psi3 = q[1];
      j.psi1_y = dq[0];
      j.psi3_y = dq[1];
      break;
    case PsiCase::IV:
    case PsiCase::V:
      j.psi1 = q[0];
      j.psi2 = q[1];
      j.psi3 = q[2];
      j.psi1_y = dq[0];
      j.psi2_y = dq[1];
      j.psi3_y = dq[2];
      break;
    case PsiCase::II:
      j.psi2 = q[0];
      j.psi3 = q[1];
      j.psi2_y = dq[0];
      j.psi3_y = dq[1];
      algebraic_psi1();
      break;
    case PsiCase::I:
      j.psi3 = q[0];
      j.psi3_y = q[1];
      j.psi2 = (2.0 * c.h * q[0] - 3.0 * q[1]) / (6.0 * c.k);
      j.psi2_y = (2.0 * c.h_y * q[0] + 2.0 * c.h * q[1] - 3.0 * dq[1]) / (6.0 * c.k) - j.psi2 * c.k_y / c.k;
      algebraic_psi1();
      break;
    case PsiCase::None: break;
  }
  return j;
}

std::vector<double> initial_state(PsiCase which, const PsiInitial& init) {
  switch (which) {
    case PsiCase::III: return {init.psi1, init.psi3};
    case PsiCase::IV:
    case PsiCase::V: return {init.psi1, init.psi2, init.psi3};
    case PsiCase::II: return {init.psi2, init.psi3};
    case PsiCase::I: return {init.psi3, init.dpsi3};
    case PsiCase::None: break;
  }
  return {};
}

}  // namespace

std::vector<double> PsiSolution::state(double y) const {
  const auto& traj = (y >= y0_) ? up_ : down_;
  if (!traj) {
    // Only y == y0 can land here when the interval starts or ends at y0.
    const auto& other = up_ ? up_ : down_;
    return (*other)(y0_);
  }
  return (*traj)(y);
}

PsiJet PsiSolution::operator()(double y) const {
  if (!(y >= y_lo_ && y <= y_hi_)) {
    std::ostringstream msg;
    msg << "PsiSolution: y = " << y << " outside [" << y_lo_ << ", " << y_hi_ << "]";
    throw DomainError(msg.str());
  }
  return psi_jet(case_, spec_->at(y), state(y));
}

PsiSolution solve_psi(const CubicOscSpec& c, PsiCase which, double y0, const PsiInitial& init, std::size_t grid) {
  if (which == PsiCase::None) throw DomainError("solve_psi: no psi-system for case 'none'");
  if (!(y0 >= c.y_lo() && y0 <= c.y_hi())) throw DomainError("solve_psi: y0 outside the interval");
  PsiSolution sol;
  sol.spec_ = &c;
  sol.case_ = which;
  sol.y0_ = y0;
  sol.y_lo_ = c.y_lo();
  sol.y_hi_ = c.y_hi();

  numkit::OdeProblem prob;
  prob.rhs = [&c, which](double y, std::span<const double> q, std::span<double> dq) {
    try {
      psi_rhs(which, c.at(y), q, dq);
    } catch (const DomainError&) {
      for (auto& v : dq) v = std::nan("");
    }
  };
  prob.y0 = initial_state(which, init);
  prob.t0 = y0;
  prob.rtol = 1e-12;
  prob.atol = 1e-14;
  sol.completed = true;
  for (double end : {c.y_hi(), c.y_lo()}) {
    if (end == y0) continue;
    prob.t1 = end;
    auto traj = numkit::integrate_ode(prob);
    if (!traj.completed()) {
      sol.completed = false;
      sol.diagnostic = traj.diagnostic();
      return sol;
    }
    (end > y0 ? sol.up_ : sol.down_) = std::move(traj);
  }

  sol.min_abs_delta = std::numeric_limits<double>::infinity();
  try {
    for (double y : chebyshev_points(c.y_lo(), c.y_hi(), grid)) {
      const auto jet = sol(y);
      for (double r : liouville_residual(c.projective(y), jet)) sol.max_residual = std::max(sol.max_residual, std::abs(r));
      sol.min_abs_delta = std::min(sol.min_abs_delta, std::abs(jet.delta()));
    }
  } catch (const DomainError& e) {
    sol.diagnostic = e.what();
    return sol;
  }
  sol.validated = sol.max_residual < 1e-7 && sol.min_abs_delta > 1e-10 && std::isfinite(sol.max_residual);
  if (!sol.validated) {
    std::ostringstream msg;
    msg << "Liouville validation failed: max residual " << sol.max_residual << ", min |Delta| " << sol.min_abs_delta;
    sol.diagnostic = msg.str();
  }
  return sol;
}

MetricTensorField reconstruct_metric(const PsiSolution& psi) {
  return [psi](double, double y) { return metric_from_psi(psi(y)); };
}

RoundTrip round_trip(const CubicOscSpec& c, const PsiSolution& psi, std::size_t grid) {
  RoundTrip out;
  const auto g = reconstruct_metric(psi);
  for (double y : chebyshev_points(c.y_lo(), c.y_hi(), grid)) {
    const auto jet = g(0.0, y);
    if (!(jet.g11 > 0.0 && jet.g11 * jet.g22 - jet.g12 * jet.g12 > 0.0)) out.positive_definite = false;
    const auto a = project(jet);
    const auto want = c.projective(y);
    const double errs[4] = {a.a0 - want.a0, a.a1 - want.a1, a.a2 - want.a2, a.a3 - want.a3};
    const double scale[4] = {want.a0, want.a1, want.a2, want.a3};
    for (int i = 0; i < 4; ++i) out.max_error = std::max(out.max_error, std::abs(errs[i]) / std::max(1.0, std::abs(scale[i])));
    ++out.samples;
  }
  return out;
}

CanonicalReport canonical_check(const Expr& lambda, double y_lo, double y_hi, double span) {
  const Expr lambda_y = numkit::diff_expr(lambda, "y");
  const auto lam = [&](double y) { return numkit::evaluate(lambda, "y", y); };
  const auto lam_y = [&](double y) { return numkit::evaluate(lambda_y, "y", y); };
  CanonicalReport out;
  for (double y : chebyshev_points(y_lo, y_hi, 64)) {
    const double l = lam(y);
    if (!(l > 0.0)) {
      std::ostringstream msg;
      msg << "canonical_check: lambda(" << y << ") = " << l << " <= 0";
      throw DomainError(msg.str());
    }
    MetricJet j;
    j.g11 = j.g22 = l;
    j.g11_y = j.g22_y = lam_y(y);
    const auto a = project(j);
    const double expect = -lam_y(y) / (2.0 * l);
    out.projection_error = std::max({out.projection_error, std::abs(a.a0 - expect), std::abs(a.a2 - expect),
                                     std::abs(a.a1), std::abs(a.a3)});
  }

  numkit::OdeProblem prob;
  prob.rhs = [&](double, std::span<const double> q, std::span<double> dq) {
    try {
      const double l = lam(q[1]);
      const double p2sum = q[2] * q[2] + q[3] * q[3];
      dq[0] = q[2] / l;
      dq[1] = q[3] / l;
      dq[2] = 0.0;
      dq[3] = lam_y(q[1]) * p2sum / (2.0 * l * l);
    } catch (const DomainError&) {
      for (auto& v : dq) v = std::nan("");
    }
  };
  prob.y0 = {0.0, 0.5 * (y_lo + y_hi), 0.7, 0.3};
  prob.t0 = 0.0;
  prob.t1 = span;
  prob.rtol = 1e-12;
  prob.atol = 1e-13;
  const auto traj = numkit::integrate_ode(prob);
  out.completed = traj.completed();
  std::vector<double> ls, hs;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto q = traj.state(i);
    ls.push_back(q[2]);
    hs.push_back((q[2] * q[2] + q[3] * q[3]) / (2.0 * lam(q[1])));
  }
  out.L_drift = drift(ls);
  out.H_drift = drift(hs);
  return out;
}

}  // namespace superosc
