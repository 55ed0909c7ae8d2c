// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "anisoeig/adapt.hpp"

namespace anisoeig::cli {

struct RunConfig {
  std::string problem = "square";
  std::string image;  ///< PGM for the image problems; empty selects the pseudo-bunny
  AdaptConfig adapt;
  std::vector<double> sweep;          ///< N_target values for converge
  std::vector<MetricMode> modes;      ///< converge modes; empty means adapt.metric_mode
  std::vector<int> boundary_points;   ///< N_b values for boundary-study
  int plateau_boundary_points = 30;
  std::vector<double> plateau_sweep;  ///< N_target values for the fixed-N_b table
  std::string out_dir = ".";
  bool write_vtk = true;
  bool write_csv = true;
  bool write_mesh = true;
  bool write_metric = true;
  int jobs = 1;
};

/// INI-style text: "[section]" headers, "key = value" lines, '#' or ';'
/// comments. Unknown sections or keys are configuration errors.
RunConfig parse_config(std::istream& is, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Sets "section.key" to a textual value; Config error for unknown keys or bad values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Reference spectrum for converge/boundary-study: analytic when available,
/// else the fixture file; Config error when neither has k values.
std::vector<double> reference_spectrum(const EigenProblem& problem, int k);

/// (lambda_h - lambda) / lambda_h
double relative_error(double lambda_h, double lambda);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// lambda(N) = lambda_inf + C N^{-p} through three points; falls back to
/// two-point extrapolation with p = 1 on the finest pair when the three
/// differences are not monotone.
struct Extrapolation {
  double value = 0.0;
  double order = 1.0;
  bool fitted = false;
};
Extrapolation richardson(const std::vector<double>& n, const std::vector<double>& lambda);

int cmd_solve(const RunConfig& config, std::ostream& out);
int cmd_converge(const RunConfig& config, std::ostream& out);
int cmd_boundary_study(const RunConfig& config, std::ostream& out);
int cmd_export_mesh(const RunConfig& config, std::ostream& out);
int cmd_reference(const RunConfig& config, std::ostream& out);

/// Full command line: subcommand, --config, overrides. Returns the exit status
/// (0 success, 2 configuration error, 3 numeric or convergence error).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Exit status for a library error code.
int exit_status(ErrorCode code) noexcept;

}  // namespace anisoeig::cli
