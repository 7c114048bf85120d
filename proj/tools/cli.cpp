#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "superosc/geodesic.hpp"
#include "superosc/lienard.hpp"
#include "superosc/metrisability.hpp"
#include "superosc/numkit/errors.hpp"
#include "superosc/oscillator.hpp"

namespace superosc::cli {

using nlohmann::json;

namespace {

struct Threshold {
  const char* name;
  std::optional<double> value;
  double limit;
  bool inclusive = false;
};

/// Adds {value, limit, pass} rows and returns whether all present rows pass.
bool drift_table(json& table, const std::vector<Threshold>& rows) {
  bool ok = true;
  for (const auto& r : rows) {
    if (!r.value) continue;
    const bool pass = r.inclusive ? *r.value <= r.limit : *r.value < r.limit;
    ok = ok && pass;
    table[r.name] = {{"value", *r.value}, {"limit", r.limit}, {"pass", pass}};
  }
  return ok;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::pair<double, double> parse_pair(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw std::invalid_argument("expected a,b but got '" + text + "'");
  std::size_t used_a = 0, used_b = 0;
  const std::string a = trim(text.substr(0, comma));
  const std::string b = trim(text.substr(comma + 1));
  const double x = std::stod(a, &used_a);
  const double y = std::stod(b, &used_b);
  if (used_a != a.size() || used_b != b.size()) throw std::invalid_argument("bad number in '" + text + "'");
  return {x, y};
}

CommandResult cmd_verify_integrals(const IntegralsConfig& cfg) {
  const OscParams p = OscParams::make(cfg.n, cfg.delta);
  if (!(cfg.span > 0.0)) throw DomainError("span must be positive");
  std::optional<MetricSpec> metric;
  if (cfg.C1) metric = p.log_case() ? n_minus1_metric(*cfg.C1, cfg.C2, cfg.delta) : MetricSpec::make(*cfg.C1, cfg.C2, p);

  CommandResult out;
  out.report = {{"schema", kSchema},
                {"command", "verify-integrals"},
                {"parameters", {{"n", cfg.n}, {"delta", cfg.delta}, {"span", cfg.span}}},
                {"suite", p.log_case() ? "log" : "power"}};
  if (cfg.C1) {
    out.report["parameters"]["C1"] = *cfg.C1;
    out.report["parameters"]["C2"] = cfg.C2;
  }
  bool all_ok = true;
  json runs = json::array();
  for (const auto& [y0, u0] : cfg.ics) {
    json run = {{"ic", {{"x", 0.0}, {"y", y0}, {"u", u0}}}};
    const auto d = oscillator_drifts(p, {0.0, y0, u0}, cfg.span);
    run["completed"] = d.completed;
    run["samples"] = d.samples;
    run["excluded"] = d.excluded;
    bool ok = d.completed;
    if (!d.completed) run["diagnostic"] = d.diagnostic;
    json table = json::object();
    if (p.log_case()) {
      ok = drift_table(table, {{"N1", d.autonomous, 1e-6}, {"N2", d.nonautonomous, 1e-6}}) && ok;
    } else {
      ok = drift_table(table, {{"I1", d.autonomous, 1e-9},
                               {"I2", d.nonautonomous, 1e-6},
                               {"I2_poly", d.polynomial, 1e-6}}) &&
           ok;
      if (d.euler_form) table["I2_euler_u_positive"] = {{"value", *d.euler_form}};
      if (d.polynomial_k) run["polynomial_k"] = *d.polynomial_k;
    }
    run["drifts"] = table;

    if (metric) {
      const double A = conformal_factor(*metric, y0);
      const CoState s0{0.0, y0, 1.0, *cfg.C1 * u0 / A};
      const auto g = geodesic_drifts(*metric, s0, cfg.span);
      json gt = json::object();
      bool gok = g.completed;
      gok = drift_table(gt, {{"L", g.L, 1e-12, true},
                             {"H", g.H, 1e-9},
                             {"R", g.R, 1e-9},
                             {"T", g.T, 1e-6},
                             {"T_k", g.Tk, 1e-6},
                             {"lifted_log", g.lifted_log, 1e-6}}) &&
            gok;
      run["geodesic"] = {{"costate", {{"x", s0.x}, {"y", s0.y}, {"p1", s0.p1}, {"p2", s0.p2}}},
                         {"completed", g.completed},
                         {"excluded", g.excluded},
                         {"drifts", gt}};
      if (!g.completed) run["geodesic"]["diagnostic"] = g.diagnostic;
      ok = ok && gok;
    }
    run["pass"] = ok;
    all_ok = all_ok && ok;
    runs.push_back(std::move(run));
  }
  out.report["runs"] = std::move(runs);
  out.report["pass"] = all_ok;
  out.exit_code = all_ok ? kPass : kFail;
  return out;
}

CommandResult cmd_geodesics(const GeodesicsConfig& cfg) {
  const OscParams p = OscParams::make(cfg.n, cfg.delta);
  if (p.log_case()) throw DomainError("geodesics: n = -1 has no explicit curves");
  if (cfg.points < 2 || !(cfg.y_hi > cfg.y_lo)) throw DomainError("geodesics: need y_hi > y_lo and >= 2 points");
  if (cfg.C3 == 0.0 && cfg.delta > 0.0) throw DomainError("geodesics: C3 = 0 needs delta < 0");

  std::ostringstream csv;
  csv << "y,x_plus,x_minus,branch_ok\n";
  std::size_t admissible = 0;
  for (std::size_t i = 0; i < cfg.points; ++i) {
    const double y = cfg.y_lo + (cfg.y_hi - cfg.y_lo) * static_cast<double>(i) / static_cast<double>(cfg.points - 1);
    double xp = std::nan(""), xm = std::nan("");
    bool ok = true;
    try {
      if (cfg.C3 == 0.0) {
        xp = degenerate_geodesic(p, cfg.C4, y, Branch::Plus);
        xm = degenerate_geodesic(p, cfg.C4, y, Branch::Minus);
      } else {
        xp = explicit_geodesic(p, cfg.C3, cfg.C4, y, Branch::Plus);
        xm = explicit_geodesic(p, cfg.C3, cfg.C4, y, Branch::Minus);
      }
      ok = std::isfinite(xp) && std::isfinite(xm);
    } catch (const DomainError&) {
      ok = false;
    }
    if (ok) ++admissible;
    csv << format_double(y) << ',' << format_double(xp) << ',' << format_double(xm) << ',' << (ok ? 1 : 0) << '\n';
  }
  CommandResult out;
  out.report = {{"schema", kSchema},
                {"command", "geodesics"},
                {"branch", cfg.C3 == 0.0 ? "degenerate" : "explicit"},
                {"points", cfg.points},
                {"admissible", admissible}};
  if (admissible == 0) {
    out.exit_code = kFail;
    out.report["error"] = "empty admissible range";
    return out;
  }
  out.text = csv.str();
  return out;
}

std::string geodesic_plot_script(const GeodesicsConfig& cfg) {
  std::ostringstream s;
  s << "# gnuplot\n"
    << "set datafile separator ','\n"
    << "set key autotitle columnhead\n"
    << "set xlabel 'x'\nset ylabel 'y'\n"
    << "set title 'n = " << format_double(cfg.n) << ", delta = " << format_double(cfg.delta)
    << ", C3 = " << format_double(cfg.C3) << "'\n"
    << "plot '" << cfg.csv_name << "' using 2:1 with lines title 'x_plus', \\\n"
    << "     '" << cfg.csv_name << "' using 3:1 with lines title 'x_minus'\n";
  return s.str();
}

CommandResult cmd_classify(const ClassifyConfig& cfg) {
  std::string coeff[4] = {"0", "0", "0", "0"};
  double y_lo = 0.5, y_hi = 2.0;
  std::istringstream in(cfg.definitions);
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t line_start = offset;
    offset += line.size() + 1;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'name = expr'", line_start);
    const std::string name = trim(line.substr(0, eq));
    const std::string rhs = trim(line.substr(eq + 1));
    static const char* names[4] = {"k", "h", "f", "g"};
    bool found = false;
    for (int i = 0; i < 4; ++i) {
      if (name == names[i]) {
        coeff[i] = rhs;
        found = true;
      }
    }
    if (found) continue;
    if (name == "y_lo" || name == "y_hi") {
      const auto e = numkit::parse_expr(rhs);
      const auto v = e.constant_value();
      if (!v) throw ParseError(name + " must be a constant", line_start + eq + 1);
      (name == "y_lo" ? y_lo : y_hi) = *v;
      continue;
    }
    throw ParseError("unknown definition '" + name + "'", line_start);
  }

  const auto spec = CubicOscSpec::parse(coeff[0], coeff[1], coeff[2], coeff[3], y_lo, y_hi);
  const auto cls = classify(spec);
  CommandResult out;
  json checks = json::array();
  for (const auto& c : cls.checks) {
    checks.push_back({{"case", to_string(c.which)}, {"residual", c.residual}, {"side_conditions", c.side_conditions}});
  }
  out.report = {{"schema", kSchema},
                {"command", "classify"},
                {"coefficients", {{"k", coeff[0]}, {"h", coeff[1]}, {"f", coeff[2]}, {"g", coeff[3]}}},
                {"interval", {y_lo, y_hi}},
                {"case", to_string(cls.which)},
                {"samples", cls.samples},
                {"checks", checks}};
  if (cls.which == PsiCase::None) {
    out.exit_code = kFail;
    return out;
  }

  // Fixed initial data per case; the first passing the Liouville gate and the
  // round trip with a positive-definite metric is kept.
  const double y0 = 0.5 * (y_lo + y_hi);
  std::vector<PsiInitial> candidates;
  switch (cls.which) {
    case PsiCase::I:
      candidates = {{0, 0, 1, 0.4}, {0, 0, 1, -0.3}, {0, 0, 1, 0}};
      break;
    case PsiCase::II:
      candidates = {{0, 1, 1, 0}, {0, 1, 2, 0}, {0, 1, -1, 0}};
      break;
    default:
      candidates = {{1, 0, 1, 0}, {10, 0, 1, 0}, {100, 0, 1, 0}, {1, 0.3, 2, 0}, {1, 0, -1, 0}, {-1, 0, 1, 0}};
      break;
  }
  for (const auto& init : candidates) {
    const auto sol = solve_psi(spec, cls.which, y0, init);
    if (!sol.validated) continue;
    const auto rt = round_trip(spec, sol);
    if (!(rt.max_error < 1e-7 && rt.positive_definite)) continue;
    out.report["reconstruction"] = {{"initial", {{"y0", y0}, {"psi1", init.psi1}, {"psi2", init.psi2}, {"psi3", init.psi3}, {"dpsi3", init.dpsi3}}},
                                    {"liouville_residual", sol.max_residual},
                                    {"min_abs_delta", sol.min_abs_delta},
                                    {"round_trip_error", rt.max_error},
                                    {"positive_definite", rt.positive_definite},
                                    {"pass", true}};
    if (cfg.metric_samples > 0) {
      const auto g = reconstruct_metric(sol);
      json rows = json::array();
      for (double y : chebyshev_points(y_lo, y_hi, cfg.metric_samples)) {
        const auto j = g(0.0, y);
        rows.push_back({{"y", y}, {"g11", j.g11}, {"g12", j.g12}, {"g22", j.g22}});
      }
      out.report["reconstruction"]["metric_samples"] = rows;
    }
    return out;
  }
  out.report["reconstruction"] = {{"pass", false}, {"error", "no fixed initial data gave a validated positive-definite metric"}};
  out.exit_code = kFail;
  return out;
}

CommandResult cmd_lienard(const LienardConfig& cfg) {
  if (!(cfg.span > 0.0)) throw DomainError("span must be positive");
  const LienardFamily fam = [&] {
    if (cfg.family == "duffing" || cfg.family == "caseII") return caseII_family(cfg.n, cfg.alpha, cfg.delta);
    if (cfg.family == "caseIII") return caseIII_family(cfg.delta);
    if (cfg.family == "dvdp") return dvdp_example(cfg.m, cfg.mu);
    throw DomainError("unknown family '" + cfg.family + "'");
  }();
  const double residual_limit = cfg.family == "dvdp" ? 1e-5 : 1e-6;

  CommandResult out;
  json params = json::object();
  for (const auto& [k, v] : fam.spec.params) params[k] = v;
  out.report = {{"schema", kSchema},
                {"command", "lienard"},
                {"family", cfg.family},
                {"parameters", params},
                {"target", {{"n", fam.osc.n}, {"delta", fam.osc.delta}}},
                {"f", fam.spec.f.to_string()},
                {"g", fam.spec.g.to_string()},
                {"span", cfg.span}};
  bool all_ok = true;
  json runs = json::array();
  for (const auto& [w0, v0] : cfg.ics) {
    const auto r = verify_equivalence(fam, {0.0, w0, v0}, cfg.span);
    json run = {{"ic", {{"xi", 0.0}, {"w", w0}, {"w_xi", v0}}}, {"completed", r.completed}};
    bool ok = r.completed;
    if (!r.completed) {
      run["diagnostic"] = r.diagnostic;
    } else {
      json table = json::object();
      ok = drift_table(table, {{"equivalence_residual", r.max_residual, residual_limit},
                               {"J1", r.J1_drift, 1e-6},
                               {"J2", r.J2_drift, 1e-5}}) &&
           ok;
      run["samples"] = r.samples;
      run["relative_residual"] = r.max_relative_residual;
      run["min_abs_jacobian"] = r.min_abs_jacobian;
      run["J2_excluded_samples"] = r.J2_excluded;
      run["drifts"] = table;
    }
    run["pass"] = ok;
    all_ok = all_ok && ok;
    runs.push_back(std::move(run));
  }
  out.report["runs"] = std::move(runs);
  out.report["pass"] = all_ok;
  out.exit_code = all_ok ? kPass : kFail;
  return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"superosc: anharmonic oscillator toolkit"};
  app.require_subcommand(1);

  IntegralsConfig ic;
  std::vector<std::string> ic_text;
  double c1 = 0.0;
  auto* vi = app.add_subcommand("verify-integrals", "Drift suite for the oscillator integrals");
  vi->add_option("--n", ic.n, "Exponent n")->required();
  vi->add_option("--delta", ic.delta, "Coupling delta")->required();
  vi->add_option("--ic", ic_text, "Initial data y,y_x at x = 0 (repeatable)");
  vi->add_option("--span", ic.span, "x-span");
  auto* c1_opt = vi->add_option("--C1", c1, "Also run the geodesic suite with this C1");
  vi->add_option("--C2", ic.C2, "Geodesic C2");

  GeodesicsConfig gc;
  std::string csv_path, plot_path;
  auto* geo = app.add_subcommand("geodesics", "Explicit geodesic table as CSV");
  geo->add_option("--n", gc.n)->required();
  geo->add_option("--delta", gc.delta)->required();
  geo->add_option("--C3", gc.C3)->required();
  geo->add_option("--C4", gc.C4, "C4, or C5 when C3 = 0");
  geo->add_option("--y-lo", gc.y_lo);
  geo->add_option("--y-hi", gc.y_hi);
  geo->add_option("--points", gc.points);
  geo->add_option("--out", csv_path, "CSV path (stdout if omitted)");
  geo->add_option("--plot", plot_path, "Write a gnuplot script here");

  ClassifyConfig cc;
  std::string def_path;
  auto* cls = app.add_subcommand("classify", "Metrisability case of y'' + k y'^3 + h y'^2 + f y' + g = 0");
  cls->add_option("--file", def_path, "Definitions file, one 'name = expr' per line")->required();
  cls->add_option("--metric-samples", cc.metric_samples);

  LienardConfig lc;
  std::vector<std::string> lic_text;
  auto* lie = app.add_subcommand("lienard", "Verify a Lienard family against the oscillator");
  lie->add_option("--family", lc.family)->check(CLI::IsMember({"duffing", "caseII", "caseIII", "dvdp"}));
  lie->add_option("--n", lc.n);
  lie->add_option("--alpha", lc.alpha);
  lie->add_option("--delta", lc.delta);
  lie->add_option("--m", lc.m);
  lie->add_option("--mu", lc.mu);
  lie->add_option("--ic", lic_text, "Initial data w,w_xi at xi = 0 (repeatable)");
  lie->add_option("--span", lc.span);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kUsage;
  }

  try {
    CommandResult res;
    if (*vi) {
      if (!ic_text.empty()) {
        ic.ics.clear();
        for (const auto& t : ic_text) ic.ics.push_back(parse_pair(t));
      }
      if (*c1_opt) ic.C1 = c1;
      res = cmd_verify_integrals(ic);
    } else if (*geo) {
      if (!csv_path.empty()) gc.csv_name = csv_path;
      res = cmd_geodesics(gc);
      if (res.exit_code == kPass) {
        if (csv_path.empty()) {
          out << res.text;
        } else {
          std::ofstream(csv_path) << res.text;
        }
        if (!plot_path.empty()) std::ofstream(plot_path) << geodesic_plot_script(gc);
      } else {
        out << res.report.dump(2) << '\n';
      }
      return res.exit_code;
    } else if (*cls) {
      std::ifstream f(def_path);
      if (!f) {
        err << "cannot read " << def_path << '\n';
        return kUsage;
      }
      cc.definitions.assign(std::istreambuf_iterator<char>(f), {});
      res = cmd_classify(cc);
    } else {
      if (!lic_text.empty()) {
        lc.ics.clear();
        for (const auto& t : lic_text) lc.ics.push_back(parse_pair(t));
      }
      res = cmd_lienard(lc);
    }
    out << res.report.dump(2) << '\n';
    return res.exit_code;
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << '\n';
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
  }
  return kUsage;
}

}  // namespace superosc::cli
