// End-to-end acceptance checks. One PASS/FAIL line per criterion; the exit
// status is non-zero when any criterion fails.
//
//   pilothop_acceptance --cli <path to pilothop> [--work DIR] [--only N ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "pilothop/harness.hpp"

namespace fs = std::filesystem;
using namespace pilothop;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int prec = 4) {
  std::ostringstream ss;
  ss.precision(prec);
  ss << v;
  return ss.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

Outcome neighbor_cardinality() {
  const SystemConfig sys;
  const Topology topo = build_topology(sys);
  const auto sets = neighbor_sets(topo, sys.r);
  const int side = sys.grid_side;
  int interior = 0;
  int wrong = 0;
  for (int row = 1; row + 1 < side; ++row) {
    for (int col = 1; col + 1 < side; ++col) {
      const int k = row * side + col;
      ++interior;
      if (sets[k].size() != 9) ++wrong;
    }
  }
  return {wrong == 0 && interior == (side - 2) * (side - 2),
          std::to_string(interior) + " interior users, " + std::to_string(wrong) + " with |N(k)| != 9"};
}

Outcome activation_mass() {
  SystemConfig sys;
  sys.E = 1;
  sys.sigma_e2 = 0.001;
  const Topology topo = build_topology(sys);
  constexpr int kDraws = 10000;
  Rng rng = make_rng(2024, 0, Stream::kEvents);
  double total = 0.0;
  for (int d = 0; d < kDraws; ++d) {
    const EventSet ev = sample_events(sys, rng);
    total += sample_activity(topo, ev, sys, rng).count();
  }
  const double mean = total / kDraws;
  return {mean >= 6.5 && mean <= 8.6, "mean activated users " + num(mean) + " over 1e4 draws (band [6.5, 8.6])"};
}

Outcome asymptotic_convergence() {
  const SystemConfig base;
  const Scenario s = build_scenario(base, 11);
  // Ten fixed active users.
  ActivityVector alpha;
  alpha.active.assign(base.K, 0);
  Rng pick = make_rng(11, 0, Stream::kActivity);
  std::vector<int> users(base.K);
  std::iota(users.begin(), users.end(), 0);
  std::shuffle(users.begin(), users.end(), pick);
  for (int i = 0; i < 10; ++i) alpha.active[users[i]] = 1;
  const Eigen::VectorXd clean = s.a.a * alpha.as_vector();

  constexpr int kTrials = 200;
  std::vector<double> means;
  for (int ml : {32, 128, 512}) {
    SystemConfig sys = base;
    sys.M = ml / sys.L;
    double acc = 0.0;
    for (int t = 0; t < kTrials; ++t) {
      Rng ch = make_rng(11, static_cast<std::uint64_t>(t), Stream::kChannels);
      Rng nz = make_rng(11, static_cast<std::uint64_t>(t), Stream::kNoise);
      const EnergyVector y = measure_energies(s.code, alpha, s.fading, sys, ch, nz);
      acc += (y.y - clean).norm() / clean.norm();
    }
    means.push_back(acc / kTrials);
  }
  const bool monotone = means[0] > means[1] && means[1] > means[2];
  return {monotone && means[2] < 0.15, "mean rel. error at ML=32/128/512: " + num(means[0]) + " / " +
                                           num(means[1]) + " / " + num(means[2]) + " (need decreasing, last < 0.15)"};
}

Outcome solver_correctness() {
  Rng rng = make_rng(404, 0, Stream::kChannels);
  constexpr double kKktMax = 1e-5;
  double worst_nnls = 0.0;
  double worst_kkt = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto p = testing::random_small_problem(40, 25, rng);
    const Eigen::VectorXd ref = testing::lawson_hanson(p.a, p.y);
    const double f_ref = (p.a * ref - p.y).squaredNorm();
    const SolverResult r = nnls_solve(p.a, p.y);
    worst_nnls = std::max(worst_nnls, std::abs(r.objective - f_ref) / f_ref);
    worst_kkt = std::max(worst_kkt, kkt_residual(p.a, p.y, RegularizerSpec{}, r.alpha_hat));
  }

  constexpr int K = 25;
  constexpr long kOracleIters = 1000000;
  double worst_reg[2] = {0.0, 0.0};
  for (int kind = 0; kind < 2; ++kind) {
    for (int i = 0; i < 20; ++i) {
      const auto p = testing::random_small_problem(15, K, rng);
      const double lambda = std::uniform_real_distribution<double>(0.05, 0.5)(rng);
      const RegularizerSpec reg = kind == 0 ? make_tv(testing::ring_neighbors(K), lambda)
                                            : make_glasso(testing::ring_neighbors(K), lambda);
      const SolverResult r = regularized_solve(p.a, p.y, reg);
      const SolverResult o = subgradient_oracle(p.a, p.y, reg, kOracleIters, rng);
      worst_reg[kind] = std::max(worst_reg[kind], std::abs(r.objective - o.objective) / o.objective);
      worst_kkt = std::max(worst_kkt, kkt_residual(p.a, p.y, reg, r.alpha_hat));
    }
  }
  const bool pass = worst_nnls <= 1e-6 && worst_reg[0] <= 1e-3 && worst_reg[1] <= 1e-3 && worst_kkt < kKktMax;
  return {pass, "NNLS vs active set " + num(worst_nnls) + " (<=1e-6), TV vs subgradient " + num(worst_reg[0]) +
                    ", GLASSO vs subgradient " + num(worst_reg[1]) + " (<=1e-3), max KKT " + num(worst_kkt) +
                    " (<1e-5)"};
}

Outcome sparse_recovery() {
  const SystemConfig sys;
  const Scenario s = build_scenario(sys, 5);
  constexpr int kInstances = 100;
  int good = 0;
  double worst = 0.0;
  Rng rng = make_rng(5, 1, Stream::kActivity);
  std::vector<int> users(sys.K);
  std::iota(users.begin(), users.end(), 0);
  for (int i = 0; i < kInstances; ++i) {
    const int n = std::uniform_int_distribution<int>(1, 25)(rng);
    std::shuffle(users.begin(), users.end(), rng);
    ActivityVector alpha;
    alpha.active.assign(sys.K, 0);
    for (int j = 0; j < n; ++j) alpha.active[users[j]] = 1;
    const Eigen::VectorXd y = asymptotic_energy(s.a, alpha).y / s.unit_energy;
    const SolverResult r = nnls_solve(s.a_unit, y);
    const double err = (r.alpha_hat - alpha.as_vector()).lpNorm<Eigen::Infinity>();
    worst = std::max(worst, err);
    if (err < 1e-3) ++good;
  }
  return {good >= 95, std::to_string(good) + "/100 instances with max-norm error < 1e-3 (need >= 95)"};
}

// --- Monte Carlo campaign shared by criteria 6 and 7 ------------------------

struct Curve {
  std::string method;
  double lambda = 0.0;
  std::vector<const AggregateRow*> rows;
};

std::vector<Curve> curves_of(const ExperimentTables& t) {
  std::vector<Curve> out;
  for (const auto& r : t.rows) {
    if (out.empty() || out.back().method != r.method || out.back().lambda != r.lambda) {
      out.push_back({r.method, r.lambda, {}});
    }
    out.back().rows.push_back(&r);
  }
  return out;
}

// Row whose mean p_fa is nearest the target (lowest threshold on ties).
const AggregateRow* at_pfa(const Curve& c, double target) {
  const AggregateRow* best = nullptr;
  for (const auto* r : c.rows) {
    if (!best || std::abs(r->p_fa_mean - target) < std::abs(best->p_fa_mean - target)) best = r;
  }
  return best;
}

const AggregateRow* rmsd_min(const Curve& c) {
  const AggregateRow* best = nullptr;
  for (const auto* r : c.rows) {
    if (!best || r->rmsd_mean < best->rmsd_mean) best = r;
  }
  return best;
}

struct Campaign {
  ExperimentTables tables;
  double seconds = 0.0;
  int trials = 0;
};

Campaign run_campaign(bool quick) {
  ExperimentConfig c = quick ? quick_experiment_config() : default_experiment_config();
  if (!quick) c.n_trials = 200;
  c.master_seed = 20240601;
  const std::vector<double> grid(c.lambdas.begin() + 1, c.lambdas.end());
  c.methods = {{RegularizerKind::kNone, {}}, {RegularizerKind::kTv, {0.06}}, {RegularizerKind::kGlasso, grid}};
  const auto t0 = std::chrono::steady_clock::now();
  Campaign out;
  out.tables = run_experiment(c);
  out.seconds = seconds_since(t0);
  out.trials = c.n_trials;
  return out;
}

Outcome roc_dominance(const Campaign& camp, double budget_s) {
  const auto curves = curves_of(camp.tables);
  const AggregateRow* nnls = nullptr;
  const AggregateRow* tv = nullptr;
  const AggregateRow* glasso = nullptr;
  double glasso_lambda = 0.0;
  for (const auto& c : curves) {
    const AggregateRow* r = at_pfa(c, 1e-2);
    if (c.method == "nnls") nnls = r;
    if (c.method == "tv" && c.lambda == 0.06) tv = r;
    if (c.method == "glasso" && (!glasso || r->p_m_mean < glasso->p_m_mean)) {
      glasso = r;
      glasso_lambda = c.lambda;
    }
  }
  if (!nnls || !tv || !glasso) return {false, "missing curves"};
  const bool pass = tv->p_m_mean < nnls->p_m_mean && glasso->p_m_mean < nnls->p_m_mean && camp.seconds < budget_s;
  return {pass, std::to_string(camp.trials) + " trials: p_m near p_fa=1e-2: NNLS " + num(nnls->p_m_mean) +
                    " (p_fa " + num(nnls->p_fa_mean) + "), TV(0.06) " + num(tv->p_m_mean) + " (p_fa " +
                    num(tv->p_fa_mean) + "), GLASSO(" + num(glasso_lambda) + ") " + num(glasso->p_m_mean) +
                    " (p_fa " + num(glasso->p_fa_mean) + "); " + num(camp.seconds, 3) + " s (budget " +
                    num(budget_s, 4) + " s)"};
}

Outcome rmsd_behaviour(const Campaign& camp) {
  const AggregateRow* tv = nullptr;
  const AggregateRow* nnls = nullptr;
  for (const auto& c : curves_of(camp.tables)) {
    if (c.method == "nnls") nnls = rmsd_min(c);
    if (c.method == "tv" && c.lambda == 0.06) tv = rmsd_min(c);
  }
  if (!nnls || !tv) return {false, "missing curves"};
  const bool in_band = tv->threshold >= 0.4 && tv->threshold <= 0.7;
  return {in_band && tv->rmsd_mean < nnls->rmsd_mean,
          "TV(0.06) RMSD minimum " + num(tv->rmsd_mean) + " at threshold " + num(tv->threshold) +
              " (band [0.4, 0.7]); NNLS minimum " + num(nnls->rmsd_mean) + " at " + num(nnls->threshold)};
}

// --- Determinism through the CLI --------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const std::string& cli, const fs::path& work) {
  if (cli.empty()) return {false, "--cli not given"};
  const fs::path one = work / "det_w1";
  const fs::path eight = work / "det_w8";
  fs::remove_all(one);
  fs::remove_all(eight);
  const std::string base = "\"" + cli + "\" sweep-lambda --quick --seed 77 ";
  const int rc1 = std::system((base + "--workers 1 --out \"" + one.string() + "\" > /dev/null").c_str());
  const int rc8 = std::system((base + "--workers 8 --out \"" + eight.string() + "\" > /dev/null").c_str());
  if (rc1 != 0 || rc8 != 0) return {false, "CLI exited with " + std::to_string(rc1) + " / " + std::to_string(rc8)};
  bool same = true;
  std::string detail;
  for (const char* f : {"roc.csv", "rmsd.csv"}) {
    const std::string a = slurp(one / f);
    const std::string b = slurp(eight / f);
    const bool eq = !a.empty() && a == b;
    same = same && eq;
    detail += std::string(f) + (eq ? " identical (" + std::to_string(a.size()) + " bytes); " : " DIFFERS; ");
  }
  return {same, detail + "1 vs 8 workers, same seed"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pilothop acceptance checks"};
  std::string cli;
  std::string work = "acceptance_work";
  std::vector<int> only;
  app.add_option("--cli", cli, "path to the pilothop executable");
  app.add_option("--work", work, "scratch directory");
  bool quick_only = false;
  app.add_option("--only", only, "run only these criteria");
  app.add_flag("--quick-only", quick_only, "criteria 6/7 on the quick preset only (reported as FAIL)");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  const std::set<int> selected(only.begin(), only.end());
  auto wanted = [&](int id) { return selected.empty() || selected.count(id) > 0; };

  int failures = 0;
  auto report = [&](int id, const std::string& name, const Outcome& o, double secs, double budget) {
    const bool pass = o.pass && secs < budget;
    if (!pass) ++failures;
    std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << name << " -- " << o.detail << " ["
              << num(secs, 3) << " s]" << std::endl;
  };
  auto timed = [&](int id, const std::string& name, double budget, const std::function<Outcome()>& fn) {
    if (!wanted(id)) return;
    const auto t0 = std::chrono::steady_clock::now();
    const Outcome o = fn();
    report(id, name, o, seconds_since(t0), budget);
  };

  timed(1, "neighbor-set cardinality", 1.0, neighbor_cardinality);
  timed(2, "event activation mass", 10.0, activation_mass);
  timed(3, "asymptotic energy convergence", 120.0, asymptotic_convergence);
  timed(4, "solver correctness", 300.0, solver_correctness);
  timed(5, "NNLS sparse recovery", 300.0, sparse_recovery);

  if (wanted(6) || wanted(7)) {
    const Campaign quick = run_campaign(true);
    const Campaign full = quick_only ? quick : run_campaign(false);
    if (wanted(6)) {
      const Outcome q = roc_dominance(quick, 180.0);
      Outcome f = roc_dominance(full, 1800.0);
      if (quick_only) f = {false, "skipped"};
      report(6, "ROC dominance", {q.pass && f.pass, "full: " + f.detail + " | quick: " + q.detail},
             quick.seconds + full.seconds, 1980.0);
    }
    if (wanted(7)) {
      Outcome o = rmsd_behaviour(full);
      if (quick_only) o.pass = false;
      report(7, "RMSD behaviour", {o.pass, "full: " + o.detail + " | quick: " + rmsd_behaviour(quick).detail},
             full.seconds, 1800.0);
    }
  }

  timed(8, "determinism", std::numeric_limits<double>::infinity(), [&] { return determinism(cli, work); });

  std::cout << (failures == 0 ? "all selected criteria passed" : std::to_string(failures) + " criterion(s) failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
