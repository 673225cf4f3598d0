#include "pilothop/harness.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "pilothop/errors.hpp"
#include "pilothop/serialize.hpp"

#ifndef PILOTHOP_VERSION
#define PILOTHOP_VERSION "0.1.0-unknown"
#endif

namespace pilothop {

std::string version_string() { return PILOTHOP_VERSION; }

Scenario build_scenario(const SystemConfig& system, std::uint64_t master_seed) {
  system.validate();
  Scenario s;
  s.system = system;
  s.topology = build_topology(system);
  s.fading = build_fading(system, s.topology, calibrate_gamma(system, s.topology));
  Rng code_rng = make_rng(master_seed, 0, Stream::kCode);
  s.code = generate_code(system, code_rng);
  s.a = build_measurement_matrix(s.code, s.fading, system);
  s.neighbors = neighbor_sets(s.topology, system.r);
  s.unit_energy = system.tau_p * system.p * s.fading.beta_min;
  s.a_unit = s.a.a / s.unit_energy;
  return s;
}

namespace {

MethodRun make_run(RegularizerKind kind, double lambda, const Scenario& scenario) {
  MethodRun run;
  run.method = to_string(kind);
  run.lambda = kind == RegularizerKind::kNone ? 0.0 : lambda;
  if (kind == RegularizerKind::kTv) run.reg = make_tv(scenario.neighbors, lambda);
  else if (kind == RegularizerKind::kGlasso) run.reg = make_glasso(scenario.neighbors, lambda);
  return run;
}

}  // namespace

std::vector<MethodRun> expand_methods(const ExperimentConfig& config, const Scenario& scenario) {
  std::vector<MethodRun> runs;
  for (const auto& m : config.methods) {
    if (m.kind == RegularizerKind::kNone) {
      runs.push_back(make_run(m.kind, 0.0, scenario));
      continue;
    }
    for (double lambda : m.lambdas.empty() ? config.lambdas : m.lambdas) {
      runs.push_back(make_run(m.kind, lambda, scenario));
    }
  }
  return runs;
}

std::vector<MethodRun> expand_lambda_sweep(const ExperimentConfig& config, const Scenario& scenario) {
  std::vector<MethodRun> runs;
  for (const auto& m : config.methods) {
    if (m.kind == RegularizerKind::kNone) {
      runs.push_back(make_run(m.kind, 0.0, scenario));
      continue;
    }
    for (double lambda : config.lambdas) runs.push_back(make_run(m.kind, lambda, scenario));
  }
  return runs;
}

TrialRealization simulate_trial(const Scenario& scenario, std::uint64_t master_seed,
                                std::uint64_t trial_index, AntennasMode mode) {
  TrialRealization t;
  t.master_seed = master_seed;
  t.trial_index = trial_index;
  Rng event_rng = make_rng(master_seed, trial_index, Stream::kEvents);
  Rng activity_rng = make_rng(master_seed, trial_index, Stream::kActivity);
  t.events = sample_events(scenario.system, event_rng);
  t.alpha = sample_activity(scenario.topology, t.events, scenario.system, activity_rng);
  if (mode == AntennasMode::kAsymptotic) {
    t.energy = asymptotic_energy(scenario.a, t.alpha);
  } else {
    Rng channel_rng = make_rng(master_seed, trial_index, Stream::kChannels);
    Rng noise_rng = make_rng(master_seed, trial_index, Stream::kNoise);
    t.energy = measure_energies(scenario.code, t.alpha, scenario.fading, scenario.system, channel_rng, noise_rng);
  }
  return t;
}

TrialResult evaluate_trial(const Scenario& scenario, const ExperimentConfig& config,
                           const std::vector<MethodRun>& methods, const TrialRealization& realization) {
  const int K = scenario.system.K;
  if (realization.alpha.num_users() != K || realization.energy.y.size() != scenario.a_unit.rows()) {
    throw DimensionError("trial realization does not match the scenario");
  }
  TrialResult res;
  res.trial_index = realization.trial_index;
  res.events = realization.events;
  res.alpha_true = realization.alpha;

  const Eigen::VectorXd y = realization.energy.y / scenario.unit_energy;
  const int num_events = static_cast<int>(realization.events.positions.size());

  // lambda = 0 and plain NNLS are the same problem; solve it once.
  std::optional<SolverResult> nnls_cache;
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    const MethodRun& run = methods[mi];
    SolverResult sol;
    if (run.reg.kind == RegularizerKind::kNone || run.reg.lambda == 0.0) {
      if (!nnls_cache) nnls_cache = nnls_solve(scenario.a_unit, y, config.solver);
      sol = *nnls_cache;
    } else {
      sol = regularized_solve(scenario.a_unit, y, run.reg, config.solver);
    }

    MethodOutcome out;
    out.method = run.method;
    out.lambda = run.lambda;
    out.converged = sol.converged;
    out.iterations = sol.iterations;
    out.alpha_hat = std::move(sol.alpha_hat);
    out.roc = roc_sweep(out.alpha_hat, realization.alpha.active, config.thresholds);

    Rng kmeans_rng(splitmix64(stream_seed(realization.master_seed, realization.trial_index, Stream::kKMeans) ^
                              splitmix64(mi)));
    std::vector<int> prev_support;
    bool have_prev = false;
    for (double thr : config.thresholds) {
      std::vector<int> support;
      for (int k = 0; k < K; ++k) {
        if (out.alpha_hat(k) > thr) support.push_back(k);
      }
      if (have_prev && support == prev_support) {
        out.estimates.push_back(out.estimates.back());
      } else {
        std::vector<Eigen::Vector2d> pts;
        pts.reserve(support.size());
        for (int k : support) pts.emplace_back(scenario.topology.users(k, 0), scenario.topology.users(k, 1));
        const std::vector<Eigen::Vector2d> centroids =
            num_events > 0 ? kmeans_cluster(pts, num_events, kmeans_rng).centroids : std::vector<Eigen::Vector2d>{};
        out.estimates.push_back(match_events(realization.events.positions, centroids));
      }
      out.no_detection.push_back(support.empty() ? 1 : 0);
      prev_support = std::move(support);
      have_prev = true;
    }
    res.methods.push_back(std::move(out));
  }
  return res;
}

TrialResult run_trial(const Scenario& scenario, const ExperimentConfig& config,
                      const std::vector<MethodRun>& methods, std::uint64_t trial_index) {
  const TrialRealization realization =
      simulate_trial(scenario, config.master_seed, trial_index, config.antennas_mode);
  return evaluate_trial(scenario, config, methods, realization);
}

namespace {

std::string curve_label(const MethodRun& run) {
  if (run.reg.kind == RegularizerKind::kNone) return "nnls";
  std::ostringstream os;
  os << run.method << " lambda=" << run.lambda;
  if (run.lambda == 0.0) os << " (nnls-equivalent)";
  return os.str();
}

ExperimentTables aggregate(const ExperimentConfig& config, const std::vector<MethodRun>& methods,
                           const std::vector<TrialResult>& trials) {
  ExperimentTables t;
  t.n_trials = static_cast<int>(trials.size());
  for (const auto& run : methods) t.curve_labels.push_back(curve_label(run));
  for (const auto& tr : trials) {
    for (const auto& m : tr.methods) t.nonconverged_solves += m.converged ? 0 : 1;
  }
  const std::size_t nthr = config.thresholds.size();
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    for (std::size_t ti = 0; ti < nthr; ++ti) {
      AggregateRow row;
      row.method = methods[mi].method;
      row.lambda = methods[mi].lambda;
      row.threshold = config.thresholds[ti];
      row.n_trials = t.n_trials;
      double pfa = 0.0, pm = 0.0, rmsd = 0.0, rmsd2 = 0.0, zero = 0.0;
      for (const auto& tr : trials) {
        const MethodOutcome& m = tr.methods[mi];
        const ConfusionMetrics& c = m.roc[ti].metrics;
        if (c.p_fa) {
          pfa += *c.p_fa;
          ++row.p_fa_defined;
        }
        if (c.p_m) {
          pm += *c.p_m;
          ++row.p_m_defined;
        }
        rmsd += m.estimates[ti].rmsd;
        rmsd2 += m.estimates[ti].rmsd * m.estimates[ti].rmsd;
        zero += m.no_detection[ti];
      }
      const double n = t.n_trials;
      row.p_fa_mean = row.p_fa_defined ? pfa / row.p_fa_defined : std::nan("");
      row.p_m_mean = row.p_m_defined ? pm / row.p_m_defined : std::nan("");
      row.rmsd_mean = rmsd / n;
      row.rmsd_stderr = n > 1 ? std::sqrt(std::max(0.0, (rmsd2 - n * row.rmsd_mean * row.rmsd_mean) / (n - 1)) / n)
                              : 0.0;
      row.zero_detection_rate = zero / n;
      t.rows.push_back(row);
    }
  }
  return t;
}

}  // namespace

ExperimentTables run_experiment(const ExperimentConfig& config, const std::vector<MethodRun>& methods,
                                const Scenario& scenario, std::vector<TrialResult>* keep_trials) {
  config.validate();
  const int n = config.n_trials;
  std::vector<TrialResult> trials(n);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        trials[i] = run_trial(scenario, config, methods, static_cast<std::uint64_t>(i));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  const int nworkers = std::min(config.workers, n);
  if (nworkers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nworkers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  ExperimentTables tables = aggregate(config, methods, trials);
  if (keep_trials) *keep_trials = std::move(trials);
  return tables;
}

ExperimentTables run_experiment(const ExperimentConfig& config) {
  const Scenario scenario = build_scenario(config.system, config.master_seed);
  return run_experiment(config, expand_methods(config, scenario), scenario);
}

ExperimentTables sweep_lambda(const ExperimentConfig& config) {
  const Scenario scenario = build_scenario(config.system, config.master_seed);
  return run_experiment(config, expand_lambda_sweep(config, scenario), scenario);
}

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string roc_csv(const ExperimentTables& tables) {
  std::string out = "method,lambda,threshold,p_fa_mean,p_m_mean,n_trials\n";
  for (const auto& r : tables.rows) {
    out += r.method + ',' + fmt(r.lambda) + ',' + fmt(r.threshold) + ',' + fmt(r.p_fa_mean) + ',' +
           fmt(r.p_m_mean) + ',' + std::to_string(r.n_trials) + '\n';
  }
  return out;
}

std::string rmsd_csv(const ExperimentTables& tables) {
  std::string out = "method,lambda,threshold,rmsd_mean,rmsd_stderr,n_trials,zero_detection_rate\n";
  for (const auto& r : tables.rows) {
    out += r.method + ',' + fmt(r.lambda) + ',' + fmt(r.threshold) + ',' + fmt(r.rmsd_mean) + ',' +
           fmt(r.rmsd_stderr) + ',' + std::to_string(r.n_trials) + ',' + fmt(r.zero_detection_rate) + '\n';
  }
  return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("failed writing " + path.string());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void emit_results(const ExperimentTables& tables, const ExperimentConfig& config, const std::string& dir,
                  const EmitOptions& options, const std::vector<TrialRealization>& dumps) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec || !fs::is_directory(root)) throw ConfigError("cannot create output directory " + dir);

  if (options.roc) write_file(root / "roc.csv", roc_csv(tables));
  if (options.rmsd) write_file(root / "rmsd.csv", rmsd_csv(tables));

  nlohmann::json curves = nlohmann::json::array();
  std::string last;
  for (const auto& r : tables.rows) {
    const std::string key = r.method + "/" + fmt(r.lambda);
    if (key == last) continue;
    last = key;
    nlohmann::json c{{"method", r.method}, {"lambda", r.lambda}};
    if (r.method != "nnls" && r.lambda == 0.0) c["equivalent_to"] = "nnls";
    curves.push_back(c);
  }
  nlohmann::json manifest{
      {"version", version_string()},
      {"command", options.command},
      {"timestamp", utc_timestamp()},
      {"config", nlohmann::json::parse(serialize_config(config))},
      {"curves", curves},
      {"curve_labels", tables.curve_labels},
      {"n_trials", tables.n_trials},
      {"nonconverged_solves", tables.nonconverged_solves},
      {"files", nlohmann::json::array()},
  };
  if (options.roc) manifest["files"].push_back("roc.csv");
  if (options.rmsd) manifest["files"].push_back("rmsd.csv");

  if (!dumps.empty()) {
    fs::create_directories(root / "trials", ec);
    if (ec) throw ConfigError("cannot create " + (root / "trials").string());
    for (const auto& d : dumps) {
      char name[48];
      std::snprintf(name, sizeof name, "trial_%06llu.json", static_cast<unsigned long long>(d.trial_index));
      write_file(root / "trials" / name, trial_json(d));
    }
    manifest["trial_dumps"] = static_cast<int>(dumps.size());
  }
  write_file(root / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace pilothop
