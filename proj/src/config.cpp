#include "pilothop/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pilothop/detection.hpp"
#include "pilothop/errors.hpp"

namespace pilothop {

using nlohmann::json;

std::string to_string(AntennasMode mode) {
  return mode == AntennasMode::kAsymptotic ? "asymptotic" : "monte_carlo";
}

std::vector<double> default_thresholds() {
  constexpr int kCount = 50;
  constexpr double kTop = 1.2;
  std::vector<double> t(kCount);
  for (int i = 0; i < kCount; ++i) t[i] = kTop * i / (kCount - 1);
  return t;
}

std::vector<double> default_lambdas() { return {0.0, 0.01, 0.03, 0.06, 0.1, 0.2}; }

ExperimentConfig default_experiment_config() {
  ExperimentConfig c;
  c.methods = {{RegularizerKind::kNone, {}}, {RegularizerKind::kTv, {}}, {RegularizerKind::kGlasso, {}}};
  c.thresholds = default_thresholds();
  c.lambdas = default_lambdas();
  return c;
}

ExperimentConfig quick_experiment_config() {
  ExperimentConfig c = default_experiment_config();
  c.system = quick_system_config();
  c.n_trials = 50;
  return c;
}

void ExperimentConfig::validate() const {
  system.validate();
  if (n_trials < 1) throw ConfigError("n_trials must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (methods.empty()) throw ConfigError("methods must be nonempty");
  if (thresholds.empty()) throw ConfigError("thresholds must be nonempty");
  if (lambdas.empty()) throw ConfigError("lambdas must be nonempty");
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) throw ConfigError("thresholds must be ascending");
  for (double l : lambdas) {
    if (!(l >= 0.0)) throw ConfigError("lambdas must be >= 0");
  }
  for (const auto& m : methods) {
    for (double l : m.lambdas) {
      if (!(l >= 0.0)) throw ConfigError("method lambdas must be >= 0");
    }
  }
  if (system.E > kMaxExhaustiveEvents) throw ConfigError("E > 8 is not supported by event pairing");
  if (solver.max_iters < 1) throw ConfigError("solver.max_iters must be >= 1");
  if (!(solver.rel_tol > 0.0) || !(solver.nnls_rel_tol > 0.0) || !(solver.abs_tol > 0.0)) throw ConfigError("solver tolerances must be > 0");
}

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw ConfigError("config " + path + ": " + what);
}

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) schema_error(path + "." + it.key(), "unknown key");
  }
}

template <class T>
void read(const json& obj, const std::string& path, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    schema_error(path + "." + key, std::string("wrong type (") + e.what() + ")");
  }
}

SystemConfig read_system(const json& j, const std::string& path, SystemConfig s) {
  reject_unknown(j, path, {"K", "L", "M", "tau_p", "T", "snr_db", "sigma2", "p", "eta", "sigma_e2", "E", "r",
                           "grid_side"});
  read(j, path, "K", s.K);
  read(j, path, "L", s.L);
  read(j, path, "M", s.M);
  read(j, path, "tau_p", s.tau_p);
  read(j, path, "T", s.T);
  read(j, path, "snr_db", s.snr_db);
  read(j, path, "sigma2", s.sigma2);
  read(j, path, "p", s.p);
  read(j, path, "eta", s.eta);
  read(j, path, "sigma_e2", s.sigma_e2);
  read(j, path, "E", s.E);
  read(j, path, "r", s.r);
  read(j, path, "grid_side", s.grid_side);
  return s;
}

json system_to_json(const SystemConfig& s) {
  return json{{"K", s.K},           {"L", s.L},         {"M", s.M},
              {"tau_p", s.tau_p},   {"T", s.T},         {"snr_db", s.snr_db},
              {"sigma2", s.sigma2}, {"p", s.p},         {"eta", s.eta},
              {"sigma_e2", s.sigma_e2}, {"E", s.E},     {"r", s.r},
              {"grid_side", s.grid_side}};
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = text.find_first_not_of(" \t\r\n") == std::string::npos ? json::object() : json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) schema_error("$", "top level must be an object");
  if (!j.contains("schema_version")) schema_error("$", "missing required field(s): schema_version");
  reject_unknown(j, "$", {"schema_version", "system", "methods", "thresholds", "lambdas", "n_trials",
                          "master_seed", "antennas_mode", "output_dir", "workers", "dump_trials", "solver"});
  int version = 0;
  read(j, "$", "schema_version", version);
  if (version != kConfigSchemaVersion) {
    schema_error("$.schema_version", "unsupported version " + std::to_string(version));
  }

  ExperimentConfig c = default_experiment_config();
  if (j.contains("system")) c.system = read_system(j.at("system"), "$.system", c.system);
  if (j.contains("methods")) {
    const json& ms = j.at("methods");
    if (!ms.is_array()) schema_error("$.methods", "expected an array");
    c.methods.clear();
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const std::string path = "$.methods[" + std::to_string(i) + "]";
      reject_unknown(ms[i], path, {"kind", "lambdas"});
      if (!ms[i].contains("kind")) schema_error(path, "missing required field(s): kind");
      MethodSpec m;
      std::string kind;
      read(ms[i], path, "kind", kind);
      m.kind = regularizer_kind_from_string(kind);
      read(ms[i], path, "lambdas", m.lambdas);
      c.methods.push_back(std::move(m));
    }
  }
  read(j, "$", "thresholds", c.thresholds);
  read(j, "$", "lambdas", c.lambdas);
  read(j, "$", "n_trials", c.n_trials);
  read(j, "$", "master_seed", c.master_seed);
  if (j.contains("antennas_mode")) {
    std::string mode;
    read(j, "$", "antennas_mode", mode);
    if (mode == "monte_carlo") c.antennas_mode = AntennasMode::kMonteCarlo;
    else if (mode == "asymptotic") c.antennas_mode = AntennasMode::kAsymptotic;
    else schema_error("$.antennas_mode", "expected monte_carlo or asymptotic");
  }
  read(j, "$", "output_dir", c.output_dir);
  read(j, "$", "workers", c.workers);
  read(j, "$", "dump_trials", c.dump_trials);
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    reject_unknown(s, "$.solver", {"max_iters", "rel_tol", "nnls_rel_tol", "abs_tol", "rho", "adapt_rho"});
    read(s, "$.solver", "max_iters", c.solver.max_iters);
    read(s, "$.solver", "rel_tol", c.solver.rel_tol);
    read(s, "$.solver", "nnls_rel_tol", c.solver.nnls_rel_tol);
    read(s, "$.solver", "abs_tol", c.solver.abs_tol);
    read(s, "$.solver", "rho", c.solver.rho);
    read(s, "$.solver", "adapt_rho", c.solver.adapt_rho);
  }
  c.validate();
  return c;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  json methods = json::array();
  for (const auto& m : c.methods) {
    json jm{{"kind", to_string(m.kind)}};
    if (!m.lambdas.empty()) jm["lambdas"] = m.lambdas;
    methods.push_back(jm);
  }
  json j{{"schema_version", kConfigSchemaVersion},
         {"system", system_to_json(c.system)},
         {"methods", methods},
         {"thresholds", c.thresholds},
         {"lambdas", c.lambdas},
         {"n_trials", c.n_trials},
         {"master_seed", c.master_seed},
         {"antennas_mode", to_string(c.antennas_mode)},
         {"output_dir", c.output_dir},
         {"workers", c.workers},
         {"dump_trials", c.dump_trials},
         {"solver", {{"max_iters", c.solver.max_iters},
                     {"rel_tol", c.solver.rel_tol},
                     {"nnls_rel_tol", c.solver.nnls_rel_tol},
                     {"abs_tol", c.solver.abs_tol},
                     {"rho", c.solver.rho},
                     {"adapt_rho", c.solver.adapt_rho}}}};
  return j.dump(2) + "\n";
}

}  // namespace pilothop
