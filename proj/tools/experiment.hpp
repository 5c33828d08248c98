#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "robdet/model.hpp"
#include "robdet/quadrature.hpp"

namespace robdet::cli {

struct NominalSpec {
  std::string family = "gaussian";
  double mean = 0.0;
  double std_dev = 1.0;
};

struct GridSettings {
  int points = 0;  // 0 = per-experiment default
};

struct FssSettings {
  int eps_count = 20;
  long runs = 100000;
  int n = 1;
};

struct SprtSettings {
  std::string family = "m";  // m | a | h | c
  double log_tl_min = -6.0;
  double log_tl_max = -0.1;
  double log_tu_min = 0.1;
  double log_tu_max = 6.0;
  double step = 0.1;
  long mc_runs = 10000;
  int max_n = 10000;
  double grid_step = 0.005;
};

struct ExperimentConfig {
  NominalSpec f0{"gaussian", -1.0, 1.0};
  NominalSpec f1{"gaussian", 1.0, 1.0};
  double eps0 = 0.0;
  double eps1 = 0.0;
  double eps0_c = 0.0;
  double eps1_c = 0.0;
  std::string experiment;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  Quadrature quadrature;
  GridSettings grid;
  FssSettings fss;
  SprtSettings sprt;
};

struct ConfigError {
  std::string where;  // JSON pointer-style anchor, or line info for parse errors
  std::string message;
};

struct ParseResult {
  std::optional<ExperimentConfig> config;
  std::vector<ConfigError> errors;
  bool ok() const { return config.has_value() && errors.empty(); }
};

/// Full parse of the JSON config with aggregated, field-anchored
/// diagnostics; defaults are filled into the returned config.
ParseResult validate_config(const std::string& raw_json);

/// Canonical JSON echo of the config with every default made explicit.
/// Parsing the echo reproduces the config exactly.
std::string echo_config(const ExperimentConfig& config);

/// 16-hex-digit digest of the canonical echo plus seed; stamped into every
/// CSV so outputs are traceable to their configuration.
std::string config_hash(const ExperimentConfig& config);

NominalModel build_model(const ExperimentConfig& config);

struct RunOutcome {
  int exit_code = 0;
  std::vector<std::string> files;
  std::string message;
};

/// Executes the configured experiment, writing CSV data files and a run
/// manifest into output_dir. Infeasibility or numerical failures surface as
/// robdet::Error (the caller maps them to exit code 1 and an error record).
RunOutcome run_experiment(const ExperimentConfig& config);

inline const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids{"lfd-plot",    "llr-ratio", "limit-curves",
                                            "rate-curves", "fss-sweep", "sprt-scan"};
  return ids;
}

}  // namespace robdet::cli
