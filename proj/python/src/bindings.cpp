#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pilothop/config.hpp"
#include "pilothop/detection.hpp"
#include "pilothop/harness.hpp"
#include "pilothop/serialize.hpp"
#include "pilothop/solvers.hpp"

namespace py = pybind11;
using namespace pilothop;

namespace {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

std::vector<Eigen::Vector2d> to_points(const Points& m) {
  std::vector<Eigen::Vector2d> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m.row(i).transpose();
  return out;
}

Points from_points(const std::vector<Eigen::Vector2d>& pts) {
  Points m(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  return m;
}

RegularizerSpec make_spec(const std::string& method, std::vector<std::vector<int>> groups, double lam) {
  switch (regularizer_kind_from_string(method)) {
    case RegularizerKind::kNone: return RegularizerSpec{};
    case RegularizerKind::kGlasso: return make_glasso(std::move(groups), lam);
    case RegularizerKind::kTv: return make_tv(std::move(groups), lam);
  }
  return RegularizerSpec{};
}

py::dict result_dict(const SolverResult& r) {
  py::dict d;
  d["alpha"] = r.alpha_hat;
  d["objective"] = r.objective;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  return d;
}

SolverOptions options(int max_iters, double rel_tol, double rho) {
  SolverOptions o;
  o.max_iters = max_iters;
  o.rel_tol = rel_tol;
  o.rho = rho;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Correlated activity detection with pilot-hopping sequences";
  m.attr("__version__") = version_string();

  m.def("prox_group_l2", &prox_group_l2, py::arg("v"), py::arg("theta"));

  m.def(
      "nnls",
      [](const Eigen::MatrixXd& a, const Eigen::VectorXd& y, int max_iters) {
        SolverOptions o;
        o.max_iters = max_iters;
        return result_dict(nnls_solve(a, y, o));
      },
      py::arg("a"), py::arg("y"), py::arg("max_iters") = SolverOptions{}.max_iters);

  m.def(
      "solve",
      [](const Eigen::MatrixXd& a, const Eigen::VectorXd& y, const std::string& method,
         std::vector<std::vector<int>> groups, double lam, int max_iters, double rel_tol, double rho) {
        const RegularizerSpec reg = make_spec(method, std::move(groups), lam);
        return result_dict(regularized_solve(a, y, reg, options(max_iters, rel_tol, rho)));
      },
      py::arg("a"), py::arg("y"), py::arg("method"), py::arg("groups") = std::vector<std::vector<int>>{},
      py::arg("lam") = 0.0, py::arg("max_iters") = SolverOptions{}.max_iters,
      py::arg("rel_tol") = SolverOptions{}.rel_tol, py::arg("rho") = 0.0,
      "method is 'nnls', 'glasso' or 'tv'; groups are G_j (glasso) or N(k) (tv)");

  m.def(
      "objective",
      [](const Eigen::MatrixXd& a, const Eigen::VectorXd& y, const Eigen::VectorXd& alpha,
         const std::string& method, std::vector<std::vector<int>> groups, double lam) {
        return objective_value(a, y, make_spec(method, std::move(groups), lam), alpha);
      },
      py::arg("a"), py::arg("y"), py::arg("alpha"), py::arg("method") = "nnls",
      py::arg("groups") = std::vector<std::vector<int>>{}, py::arg("lam") = 0.0);

  m.def(
      "kkt_residual",
      [](const Eigen::MatrixXd& a, const Eigen::VectorXd& y, const Eigen::VectorXd& alpha,
         const std::string& method, std::vector<std::vector<int>> groups, double lam) {
        return kkt_residual(a, y, make_spec(method, std::move(groups), lam), alpha);
      },
      py::arg("a"), py::arg("y"), py::arg("alpha"), py::arg("method") = "nnls",
      py::arg("groups") = std::vector<std::vector<int>>{}, py::arg("lam") = 0.0);

  py::class_<Scenario>(m, "Scenario")
      .def_property_readonly("K", [](const Scenario& s) { return s.system.K; })
      .def_property_readonly("users", [](const Scenario& s) { return Eigen::MatrixXd(s.topology.users); })
      .def_property_readonly("a", [](const Scenario& s) { return Eigen::MatrixXd(s.a.a); })
      .def_readonly("a_unit", &Scenario::a_unit)
      .def_readonly("unit_energy", &Scenario::unit_energy)
      .def_readonly("neighbors", &Scenario::neighbors)
      .def("to_json", [](const Scenario& s) { return scenario_json(s); });

  m.def(
      "build_scenario",
      [](std::uint64_t seed, bool quick) {
        const ExperimentConfig c = quick ? quick_experiment_config() : default_experiment_config();
        return build_scenario(c.system, seed);
      },
      py::arg("seed"), py::arg("quick") = true);

  m.def(
      "simulate_trial",
      [](const Scenario& s, std::uint64_t seed, std::uint64_t trial, bool asymptotic) {
        const TrialRealization t = simulate_trial(
            s, seed, trial, asymptotic ? AntennasMode::kAsymptotic : AntennasMode::kMonteCarlo);
        py::dict d;
        d["events"] = from_points(t.events.positions);
        d["alpha"] = t.alpha.active;
        d["y"] = t.energy.y;
        return d;
      },
      py::arg("scenario"), py::arg("seed"), py::arg("trial"), py::arg("asymptotic") = false);

  m.def(
      "kmeans",
      [](const Points& pts, int k, std::uint64_t seed) {
        Rng rng(seed);
        const KMeansResult r = kmeans_cluster(to_points(pts), k, rng);
        return py::make_tuple(from_points(r.centroids), r.inertia);
      },
      py::arg("points"), py::arg("k"), py::arg("seed") = 0);

  m.def(
      "match_events",
      [](const Points& events, const Points& centroids) {
        const EventEstimate e = match_events(to_points(events), to_points(centroids));
        return py::make_tuple(e.pairing, e.rmsd);
      },
      py::arg("events"), py::arg("centroids"));

  m.def(
      "default_config",
      [](bool quick) { return serialize_config(quick ? quick_experiment_config() : default_experiment_config()); },
      py::arg("quick") = true, "experiment config as JSON text");

  m.def(
      "run_experiment",
      [](const std::string& config_json, bool sweep) {
        const ExperimentConfig c = parse_config_text(config_json);
        ExperimentTables t;
        {
          py::gil_scoped_release release;
          t = sweep ? sweep_lambda(c) : run_experiment(c);
        }
        py::dict d;
        d["roc_csv"] = roc_csv(t);
        d["rmsd_csv"] = rmsd_csv(t);
        d["nonconverged_solves"] = t.nonconverged_solves;
        return d;
      },
      py::arg("config_json"), py::arg("sweep") = false);
}
