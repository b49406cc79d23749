#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nir3/polynomial.hpp"

// Batch front door: config parsing, command dispatch, report emission.
// Exit codes: 0 ok, 1 config error, 2 degenerate (non-Morse) K,
// 3 inconclusive/failed validation, 4 solver failure.

namespace nir3::cli {

struct ConfigError {
  std::string message;
  int line = 0;
  int column = 0;
};

// key = value sections; # comments; unknown keys rejected.
struct RunConfig {
  // [run]
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  int L = 16;
  int L_zonal = 512;
  bool zonal = false;

  // [problem]
  std::string K_expr = "x4 + 2";
  std::vector<std::array<double, 3>> rotations;  // (i, j, angle) 1-based planes
  std::array<double, 4> zonal_axis{0, 0, 0, 1};

  // [analyze]
  int n_starts = 600;

  // [validate]
  std::vector<double> taus{0.04, 0.01, 0.0025};
  double separation = 1.5707963267948966;
  double quad_rel_tol = 1e-8;
  std::vector<double> pohozaev_deltas{1e-2, 1e-3, 1e-4};

  // [solve] / [continue]
  double tau = 0.1;
  double tau_start = 0.5;
  double tau_end = 0.005;
  int n_steps = 24;
  double c_mu = 0.25;
  std::string seed_mode = "both";  // constant | bubble | both
  double rtol = 1e-9;

  // [report]
  std::string branch_csv;
  std::string prediction_file;
};

// Parses the file; throws ConfigError on malformed input or unknown keys.
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& name = "<config>");

// Effective K: the parsed expression with the configured rotations applied.
AmbientPolynomial effective_K(const RunConfig& cfg);

int cmd_analyze(const RunConfig& cfg);
int cmd_validate(const RunConfig& cfg);
int cmd_solve(const RunConfig& cfg);
int cmd_continue(const RunConfig& cfg);
int cmd_predict(const RunConfig& cfg);
int cmd_report(const RunConfig& cfg);

int run_main(int argc, char** argv);

}  // namespace nir3::cli
