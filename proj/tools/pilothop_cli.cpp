// pilothop: command-line front end for scenario construction, trial
// simulation, detection replay and the ROC / RMSD / lambda-sweep campaigns.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pilothop/config.hpp"
#include "pilothop/errors.hpp"
#include "pilothop/harness.hpp"
#include "pilothop/serialize.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> workers;
  std::string out;
  bool quick = false;
  bool dump_trials = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON experiment config");
  cmd->add_option("--seed", f.seed, "master seed (u64)");
  cmd->add_option("--trials", f.trials, "number of Monte Carlo trials");
  cmd->add_option("--workers", f.workers, "worker threads");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_flag("--quick", f.quick, "reduced 18x18 scenario, 50 trials");
  cmd->add_flag("--dump-trials", f.dump_trials, "write per-trial realizations under <out>/trials");
}

pilothop::ExperimentConfig resolve(const CommonFlags& f) {
  pilothop::ExperimentConfig c = f.config_path.empty() ? pilothop::default_experiment_config()
                                                       : pilothop::parse_config(f.config_path);
  if (f.quick) {
    const pilothop::ExperimentConfig q = pilothop::quick_experiment_config();
    c.system = q.system;
    c.n_trials = q.n_trials;
  }
  if (f.seed) c.master_seed = *f.seed;
  if (f.trials) c.n_trials = *f.trials;
  if (f.workers) c.workers = *f.workers;
  if (!f.out.empty()) c.output_dir = f.out;
  if (f.dump_trials) c.dump_trials = true;
  c.validate();
  return c;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw pilothop::ConfigError("cannot write " + path.string());
  out << text;
}

std::vector<pilothop::TrialRealization> collect_dumps(const pilothop::ExperimentConfig& c,
                                                      const pilothop::Scenario& s) {
  std::vector<pilothop::TrialRealization> dumps;
  if (!c.dump_trials) return dumps;
  for (int i = 0; i < c.n_trials; ++i) {
    dumps.push_back(pilothop::simulate_trial(s, c.master_seed, static_cast<std::uint64_t>(i), c.antennas_mode));
  }
  return dumps;
}

int run_campaign(const CommonFlags& f, const std::string& command) {
  const pilothop::ExperimentConfig c = resolve(f);
  for (const auto& w : c.system.validate()) std::cerr << "warning: " << w << '\n';
  const pilothop::Scenario s = pilothop::build_scenario(c.system, c.master_seed);
  const auto methods = command == "sweep-lambda" ? pilothop::expand_lambda_sweep(c, s)
                                                 : pilothop::expand_methods(c, s);
  const pilothop::ExperimentTables tables = pilothop::run_experiment(c, methods, s);
  pilothop::EmitOptions opts;
  opts.command = command;
  opts.roc = command != "rmsd";
  opts.rmsd = command != "roc";
  pilothop::emit_results(tables, c, c.output_dir, opts, collect_dumps(c, s));
  if (tables.nonconverged_solves > 0) {
    std::cerr << "warning: " << tables.nonconverged_solves << " solves hit max_iters\n";
  }
  std::cout << "wrote " << c.output_dir << " (" << tables.n_trials << " trials, " << methods.size()
            << " curves)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pilothop: correlated activity detection with pilot-hopping sequences"};
  app.require_subcommand(1);

  CommonFlags topo_f, sim_f, det_f, roc_f, rmsd_f, sweep_f;
  std::string trial_path;

  auto* topology = app.add_subcommand("topology", "write the scenario (topology, fading, code, A) as JSON");
  add_common(topology, topo_f);
  auto* simulate = app.add_subcommand("simulate", "write per-trial realizations (events, alpha, y)");
  add_common(simulate, sim_f);
  auto* detect = app.add_subcommand("detect", "run every method on one trial dump");
  add_common(detect, det_f);
  detect->add_option("--trial", trial_path, "trial dump written by `simulate`")->required();
  auto* roc = app.add_subcommand("roc", "Monte Carlo ROC campaign -> roc.csv");
  add_common(roc, roc_f);
  auto* rmsd = app.add_subcommand("rmsd", "Monte Carlo event-localisation campaign -> rmsd.csv");
  add_common(rmsd, rmsd_f);
  auto* sweep = app.add_subcommand("sweep-lambda", "every regularizer over the lambda grid -> roc.csv, rmsd.csv");
  add_common(sweep, sweep_f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*topology) {
      const auto c = resolve(topo_f);
      const auto s = pilothop::build_scenario(c.system, c.master_seed);
      write_text(std::filesystem::path(c.output_dir) / "scenario.json", pilothop::scenario_json(s));
      std::cout << "wrote " << c.output_dir << "/scenario.json\n";
    } else if (*simulate) {
      auto c = resolve(sim_f);
      const auto s = pilothop::build_scenario(c.system, c.master_seed);
      for (int i = 0; i < c.n_trials; ++i) {
        const auto t = pilothop::simulate_trial(s, c.master_seed, static_cast<std::uint64_t>(i), c.antennas_mode);
        char name[48];
        std::snprintf(name, sizeof name, "trial_%06d.json", i);
        write_text(std::filesystem::path(c.output_dir) / "trials" / name, pilothop::trial_json(t));
      }
      std::cout << "wrote " << c.n_trials << " trials to " << c.output_dir << "/trials\n";
    } else if (*detect) {
      const auto c = resolve(det_f);
      std::ifstream in(trial_path);
      if (!in) throw pilothop::ConfigError("cannot open trial dump " + trial_path);
      std::stringstream ss;
      ss << in.rdbuf();
      const auto realization = pilothop::trial_from_json(ss.str());
      // The code (and hence A) depends on the seed the trial was generated with.
      const auto s = pilothop::build_scenario(c.system, realization.master_seed);
      const auto result = pilothop::evaluate_trial(s, c, pilothop::expand_methods(c, s), realization);
      char name[48];
      std::snprintf(name, sizeof name, "detect_%06llu.json",
                    static_cast<unsigned long long>(realization.trial_index));
      write_text(std::filesystem::path(c.output_dir) / name, pilothop::trial_result_json(result, c.thresholds));
      std::cout << "wrote " << c.output_dir << "/" << name << "\n";
    } else if (*roc) {
      return run_campaign(roc_f, "roc");
    } else if (*rmsd) {
      return run_campaign(rmsd_f, "rmsd");
    } else if (*sweep) {
      return run_campaign(sweep_f, "sweep-lambda");
    }
  } catch (const pilothop::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
