#pragma once

// Non-negative least squares and non-negative group-norm regularized least
// squares,
//
//   minimize_{alpha >= 0}  |A alpha - y|^2 + lambda * sum_j c_j |B_j alpha|_2
//
// where B_j selects the coordinates of group G_j (GLASSO) or stacks the
// differences alpha_k - alpha_i, i in N(k) \ {k} (TV).

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "pilothop/rng.hpp"

namespace pilothop {

enum class RegularizerKind { kNone, kGlasso, kTv };

std::string to_string(RegularizerKind kind);
RegularizerKind regularizer_kind_from_string(const std::string& name);

struct RegularizerSpec {
  RegularizerKind kind = RegularizerKind::kNone;
  std::vector<std::vector<int>> groups;  // G_j for GLASSO, N(k) for TV
  std::vector<double> weights;           // c_j; empty means all ones
  double lambda = 0.0;

  /// Throws ConfigError for empty GLASSO groups, negative lambda, bad
  /// weights or out-of-range indices.
  void validate(int num_users) const;
  double weight(std::size_t j) const { return weights.empty() ? 1.0 : weights[j]; }
};

RegularizerSpec make_glasso(std::vector<std::vector<int>> groups, double lambda);
RegularizerSpec make_tv(std::vector<std::vector<int>> neighbors, double lambda);

/// Stacked linear operator [B_1; ...; B_G] with per-block scale lambda*c_j.
struct GroupOperator {
  Eigen::SparseMatrix<double, Eigen::RowMajor> b;
  std::vector<int> offsets;   // block j occupies rows [offsets[j], offsets[j+1])
  std::vector<double> scale;  // lambda * c_j

  int num_groups() const { return static_cast<int>(scale.size()); }
  int block_size(int j) const { return offsets[j + 1] - offsets[j]; }
};

GroupOperator build_group_operator(const RegularizerSpec& reg, int num_users);

/// lambda * sum_j c_j |B_j alpha|.
double regularizer_value(const RegularizerSpec& reg, const Eigen::VectorXd& alpha);

/// |A alpha - y|^2 + R(alpha).
double objective_value(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, const RegularizerSpec& reg,
                       const Eigen::VectorXd& alpha);

struct SolverOptions {
  int max_iters = 50000;
  // ADMM: relative primal/dual residual tolerance.
  double rel_tol = 1e-6;
  // NNLS: gradient-mapping tolerance relative to |2 A^T y|. Tighter than the
  // ADMM default because projected gradient stalls on flat faces.
  double nnls_rel_tol = 1e-9;
  double abs_tol = 1e-10;
  // ADMM penalty; <= 0 selects it from the column energy of A.
  double rho = 0.0;
  // ADMM over-relaxation factor in (0, 2).
  double relaxation = 1.6;
  // Let ADMM rebalance rho when primal and dual residuals drift apart.
  bool adapt_rho = false;
  bool record_history = false;
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double residual = 0.0;
};

struct SolverResult {
  Eigen::VectorXd alpha_hat;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> history;
};

/// v * max(0, 1 - theta / |v|); zero for v = 0.
Eigen::VectorXd prox_group_l2(const Eigen::VectorXd& v, double theta);

/// Largest eigenvalue of A^T A by power iteration (deterministic start).
double power_iteration_norm2(const Eigen::MatrixXd& a, int iters = 20, double rel_tol = 1e-6);

/// Accelerated projected gradient with backtracking and adaptive restart.
SolverResult nnls_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                        const SolverOptions& options = {});

/// ADMM over the splitting z = B alpha, w = alpha with w >= 0. lambda == 0
/// (or kind == kNone) is delegated to nnls_solve.
SolverResult regularized_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                               const RegularizerSpec& reg, const SolverOptions& options = {});

struct KktOptions {
  // Coordinates / group images with magnitude below zero_tol * max(1, |alpha|_inf)
  // are treated as sitting on the constraint or at the kink.
  double zero_tol = 1e-5;
  int inner_iters = 20000;
  double inner_tol = 1e-13;
};

/// Norm of the smallest projected subgradient of the objective at alpha_hat:
/// coordinates with alpha_k > 0 need a zero component, coordinates at zero a
/// non-negative one. Zero exactly at an optimum.
double kkt_residual(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, const RegularizerSpec& reg,
                    const Eigen::VectorXd& alpha_hat, const KktOptions& options = {});

/// Projected subgradient descent with steps (1/L) / sqrt(1 + t/1000) from a random
/// non-negative start; returns the best iterate seen. Slow reference solver.
SolverResult subgradient_oracle(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                                const RegularizerSpec& reg, long iters, Rng& rng);

/// iteration,objective,residual CSV with header.
std::string history_csv(const SolverResult& result);

}  // namespace pilothop
