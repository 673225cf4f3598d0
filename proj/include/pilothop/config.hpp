#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pilothop/solvers.hpp"
#include "pilothop/sysmodel.hpp"

namespace pilothop {

inline constexpr int kConfigSchemaVersion = 1;

enum class AntennasMode { kMonteCarlo, kAsymptotic };

std::string to_string(AntennasMode mode);

/// One detector. Regularized methods run once per lambda; an empty `lambdas`
/// means "use the experiment-wide grid".
struct MethodSpec {
  RegularizerKind kind = RegularizerKind::kNone;
  std::vector<double> lambdas;

  bool operator==(const MethodSpec&) const = default;
};

struct ExperimentConfig {
  SystemConfig system;
  std::vector<MethodSpec> methods;
  std::vector<double> thresholds;
  std::vector<double> lambdas;
  int n_trials = 200;
  std::uint64_t master_seed = 1;
  AntennasMode antennas_mode = AntennasMode::kMonteCarlo;
  std::string output_dir = "results";
  int workers = 1;
  bool dump_trials = false;
  SolverOptions solver;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

/// 50 points evenly spaced on [0, 1.2] (alpha is on the unit activity scale).
std::vector<double> default_thresholds();
/// {0, 0.01, 0.03, 0.06, 0.1, 0.2}.
std::vector<double> default_lambdas();

/// Full-scale scenario: 36x36 grid, L=4, M=32, tau_p=T=10, SNR 10 dB,
/// methods NNLS, TV and GLASSO over the default lambda grid.
ExperimentConfig default_experiment_config();

/// `--quick` preset: quick_system_config() with 50 trials.
ExperimentConfig quick_experiment_config();

/// Parses the JSON schema. Missing keys take the defaults above except
/// `schema_version`, which is required; unknown keys are rejected.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);

std::string serialize_config(const ExperimentConfig& config);

}  // namespace pilothop
