#pragma once

// Seeded Monte Carlo campaigns: trial generation, paired evaluation of all
// methods on the same realization, aggregation and CSV/JSON emission.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pilothop/config.hpp"
#include "pilothop/detection.hpp"
#include "pilothop/simulator.hpp"
#include "pilothop/solvers.hpp"
#include "pilothop/sysmodel.hpp"

namespace pilothop {

/// Trial-invariant system artifacts.
struct Scenario {
  SystemConfig system;
  Topology topology;
  FadingProfile fading;
  PilotHopCode code;
  MeasurementMatrix a;
  std::vector<std::vector<int>> neighbors;
  /// tau_p * p * beta_min: the common nonzero of A. Solvers see A and y
  /// divided by this, so alpha and lambda live on the unit activity scale.
  double unit_energy = 1.0;
  Eigen::MatrixXd a_unit;
};

Scenario build_scenario(const SystemConfig& system, std::uint64_t master_seed);

/// A (method, lambda) pair ready to solve.
struct MethodRun {
  std::string method;
  double lambda = 0.0;
  RegularizerSpec reg;
};

std::vector<MethodRun> expand_methods(const ExperimentConfig& config, const Scenario& scenario);

/// Every regularized method over the full lambda grid (lambda = 0 included).
std::vector<MethodRun> expand_lambda_sweep(const ExperimentConfig& config, const Scenario& scenario);

struct TrialRealization {
  std::uint64_t master_seed = 0;
  std::uint64_t trial_index = 0;
  EventSet events;
  ActivityVector alpha;
  EnergyVector energy;
};

TrialRealization simulate_trial(const Scenario& scenario, std::uint64_t master_seed,
                                std::uint64_t trial_index, AntennasMode mode);

struct MethodOutcome {
  std::string method;
  double lambda = 0.0;
  Eigen::VectorXd alpha_hat;
  bool converged = false;
  int iterations = 0;
  std::vector<RocPoint> roc;              // per threshold
  std::vector<EventEstimate> estimates;   // per threshold
  std::vector<std::uint8_t> no_detection; // per threshold
};

struct TrialResult {
  std::uint64_t trial_index = 0;
  EventSet events;
  ActivityVector alpha_true;
  std::vector<MethodOutcome> methods;
};

/// Solves every method on the realization's energies and scores each threshold.
TrialResult evaluate_trial(const Scenario& scenario, const ExperimentConfig& config,
                           const std::vector<MethodRun>& methods, const TrialRealization& realization);

TrialResult run_trial(const Scenario& scenario, const ExperimentConfig& config,
                      const std::vector<MethodRun>& methods, std::uint64_t trial_index);

struct AggregateRow {
  std::string method;
  double lambda = 0.0;
  double threshold = 0.0;
  double p_fa_mean = 0.0;
  double p_m_mean = 0.0;
  double rmsd_mean = 0.0;
  double rmsd_stderr = 0.0;
  double zero_detection_rate = 0.0;
  int n_trials = 0;
  int p_fa_defined = 0;
  int p_m_defined = 0;
};

struct ExperimentTables {
  std::vector<AggregateRow> rows;  // method-major, then lambda, then threshold
  std::vector<std::string> curve_labels;
  int nonconverged_solves = 0;
  int n_trials = 0;
};

/// Deterministic fold over trial-index order; `config.workers` threads.
ExperimentTables run_experiment(const ExperimentConfig& config, const std::vector<MethodRun>& methods,
                                const Scenario& scenario, std::vector<TrialResult>* keep_trials = nullptr);
ExperimentTables run_experiment(const ExperimentConfig& config);
ExperimentTables sweep_lambda(const ExperimentConfig& config);

std::string roc_csv(const ExperimentTables& tables);
std::string rmsd_csv(const ExperimentTables& tables);

struct EmitOptions {
  bool roc = true;
  bool rmsd = true;
  std::string command;
};

/// Writes roc.csv / rmsd.csv / manifest.json (and trials/ when trial dumps
/// are supplied) under dir. Throws ConfigError when dir is not writable.
void emit_results(const ExperimentTables& tables, const ExperimentConfig& config, const std::string& dir,
                  const EmitOptions& options, const std::vector<TrialRealization>& dumps = {});

std::string version_string();

}  // namespace pilothop
