#include <cmath>
#include <sstream>

#include "pilothop/errors.hpp"
#include "pilothop/solvers.hpp"

namespace pilothop {

std::string to_string(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::kNone: return "nnls";
    case RegularizerKind::kGlasso: return "glasso";
    case RegularizerKind::kTv: return "tv";
  }
  return "unknown";
}

RegularizerKind regularizer_kind_from_string(const std::string& name) {
  if (name == "nnls" || name == "none") return RegularizerKind::kNone;
  if (name == "glasso") return RegularizerKind::kGlasso;
  if (name == "tv") return RegularizerKind::kTv;
  throw ConfigError("unknown method '" + name + "' (expected nnls, glasso or tv)");
}

void RegularizerSpec::validate(int num_users) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be finite and >= 0");
  if (!weights.empty() && weights.size() != groups.size()) {
    throw ConfigError("weights must be empty or have one entry per group");
  }
  for (double c : weights) {
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("group weights must be > 0");
  }
  if (kind == RegularizerKind::kTv && groups.size() != static_cast<std::size_t>(num_users)) {
    throw ConfigError("TV needs one neighbour set per user");
  }
  for (const auto& g : groups) {
    if (kind == RegularizerKind::kGlasso && g.empty()) throw ConfigError("empty GLASSO group");
    for (int i : g) {
      if (i < 0 || i >= num_users) throw ConfigError("group index out of range");
    }
  }
}

RegularizerSpec make_glasso(std::vector<std::vector<int>> groups, double lambda) {
  RegularizerSpec r;
  r.kind = RegularizerKind::kGlasso;
  r.groups = std::move(groups);
  r.lambda = lambda;
  return r;
}

RegularizerSpec make_tv(std::vector<std::vector<int>> neighbors, double lambda) {
  RegularizerSpec r;
  r.kind = RegularizerKind::kTv;
  r.groups = std::move(neighbors);
  r.lambda = lambda;
  return r;
}

GroupOperator build_group_operator(const RegularizerSpec& reg, int num_users) {
  GroupOperator op;
  std::vector<Eigen::Triplet<double>> entries;
  int row = 0;
  op.offsets.push_back(0);
  if (reg.kind != RegularizerKind::kNone) {
    for (std::size_t j = 0; j < reg.groups.size(); ++j) {
      for (int i : reg.groups[j]) {
        if (reg.kind == RegularizerKind::kGlasso) {
          entries.emplace_back(row++, i, 1.0);
        } else {
          const int k = static_cast<int>(j);
          if (i == k) continue;
          entries.emplace_back(row, k, 1.0);
          entries.emplace_back(row, i, -1.0);
          ++row;
        }
      }
      op.offsets.push_back(row);
      op.scale.push_back(reg.lambda * reg.weight(j));
    }
  }
  op.b.resize(row, num_users);
  op.b.setFromTriplets(entries.begin(), entries.end());
  return op;
}

double regularizer_value(const RegularizerSpec& reg, const Eigen::VectorXd& alpha) {
  if (reg.kind == RegularizerKind::kNone || reg.lambda == 0.0) return 0.0;
  const GroupOperator op = build_group_operator(reg, static_cast<int>(alpha.size()));
  const Eigen::VectorXd z = op.b * alpha;
  double total = 0.0;
  for (int j = 0; j < op.num_groups(); ++j) {
    total += op.scale[j] * z.segment(op.offsets[j], op.block_size(j)).norm();
  }
  return total;
}

double objective_value(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, const RegularizerSpec& reg,
                       const Eigen::VectorXd& alpha) {
  return (a * alpha - y).squaredNorm() + regularizer_value(reg, alpha);
}

Eigen::VectorXd prox_group_l2(const Eigen::VectorXd& v, double theta) {
  if (theta < 0.0) throw ConfigError("prox threshold must be >= 0");
  const double n = v.norm();
  if (n <= theta || n == 0.0) return Eigen::VectorXd::Zero(v.size());
  return v * (1.0 - theta / n);
}

double power_iteration_norm2(const Eigen::MatrixXd& a, int iters, double rel_tol) {
  if (a.size() == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(a.cols()) / std::sqrt(static_cast<double>(a.cols()));
  double est = 0.0;
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd w = a.transpose() * (a * v);
    const double n = w.norm();
    if (n == 0.0) {
      // The start vector hit the null space; fall back to the Frobenius bound.
      return a.squaredNorm();
    }
    const double prev = est;
    est = v.dot(w);
    v = w / n;
    if (it > 0 && std::abs(est - prev) <= rel_tol * est) break;
  }
  return est;
}

std::string history_csv(const SolverResult& result) {
  std::ostringstream os;
  os.precision(17);
  os << "iteration,objective,residual\n";
  for (const auto& h : result.history) os << h.iteration << ',' << h.objective << ',' << h.residual << '\n';
  return os.str();
}

}  // namespace pilothop
