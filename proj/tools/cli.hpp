#pragma once

/**
 * @file cli.hpp
 * @brief Batch front end: integral-drift suites, explicit geodesic tables,
 * metrisability classification and Lienard verification.
 *
 * Every command is deterministic. Reports are JSON with "schema": "superosc/1".
 * Exit codes: 0 pass, 1 verification failure, 2 usage or parse error.
 */

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace superosc::cli {

inline constexpr const char* kSchema = "superosc/1";

enum ExitCode : int { kPass = 0, kFail = 1, kUsage = 2 };

struct CommandResult {
  int exit_code = kPass;
  nlohmann::json report;  ///< JSON commands
  std::string text;       ///< CSV commands
};

/// Initial data "a,b" as two numbers. Throws std::invalid_argument.
[[nodiscard]] std::pair<double, double> parse_pair(const std::string& text);

struct IntegralsConfig {
  double n = 3.0;
  double delta = 1.0;
  std::vector<std::pair<double, double>> ics{{1.0, 0.0}};  ///< (y, y_x) at x = 0
  double span = 5.0;
  /// Also run the lifted geodesic suite with these constants.
  std::optional<double> C1;
  double C2 = 0.0;
};

/// Oscillator drift suite, or the N1/N2 suite at n = -1; optional geodesic suite.
[[nodiscard]] CommandResult cmd_verify_integrals(const IntegralsConfig& cfg);

struct GeodesicsConfig {
  double n = 3.0;
  double delta = 1.0;
  double C3 = 1.0;
  double C4 = 0.0;  ///< C5 on the C3 = 0 branch
  double y_lo = 0.0;
  double y_hi = 1.0;
  std::size_t points = 101;
  std::string csv_name = "geodesics.csv";  ///< referenced by the plot script
};

/// CSV `y,x_plus,x_minus,branch_ok` on a uniform y-grid.
[[nodiscard]] CommandResult cmd_geodesics(const GeodesicsConfig& cfg);

/// gnuplot commands plotting both branches of a geodesics CSV.
[[nodiscard]] std::string geodesic_plot_script(const GeodesicsConfig& cfg);

struct ClassifyConfig {
  std::string definitions;  ///< lines `name = expr` for k, h, f, g, y_lo, y_hi; `#` starts a comment
  std::size_t metric_samples = 0;
};

/// Case tag, relation residuals, and the round-trip error of the reconstructed metric.
[[nodiscard]] CommandResult cmd_classify(const ClassifyConfig& cfg);

struct LienardConfig {
  std::string family = "duffing";  ///< duffing | caseII | caseIII | dvdp
  double n = 3.0;
  double alpha = 1.0;
  double delta = 1.0;
  double m = 2.0;
  double mu = 1.0;
  std::vector<std::pair<double, double>> ics{{0.6, 0.1}};  ///< (w, w_xi) at xi = 0
  double span = 5.0;
};

/// Equivalence residuals and J1/J2 drifts along integrated trajectories.
[[nodiscard]] CommandResult cmd_lienard(const LienardConfig& cfg);

/// Parses argv, dispatches and writes the report or CSV to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace superosc::cli
