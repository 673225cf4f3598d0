#include <algorithm>
#include <cmath>
#include <memory>

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>

#include "linear_map.hpp"
#include "pilothop/errors.hpp"
#include "pilothop/solvers.hpp"

namespace pilothop {

namespace {

// Solves (2 A^T A + rho (B^T B + I)) x = rhs. Small problems factor the dense
// matrix; large wide ones factor the sparse part D = rho (B^T B + I) and fold
// in the low-rank A^T A term with the Woodbury identity:
//   (D + 2 A^T A)^-1 = D^-1 - W (I/2 + A W)^-1 A D^-1,  W = D^-1 A^T.
class XUpdate {
 public:
  XUpdate(const Eigen::MatrixXd& a, const Eigen::SparseMatrix<double>& btb)
      : a_(a), a_sparse_(a.sparseView()), btb_(btb) {
    const Eigen::Index K = a.cols();
    woodbury_ = K > 400 && a.rows() < K;
    if (!woodbury_) ata2_ = 2.0 * a.transpose() * a;
  }

  void factor(double rho) {
    const Eigen::Index K = a_.cols();
    if (!woodbury_) {
      Eigen::MatrixXd q = ata2_;
      q += rho * Eigen::MatrixXd(btb_);
      q.diagonal().array() += rho;
      dense_.compute(q);
      if (dense_.info() != Eigen::Success) throw NumericalError("ADMM x-update factorization failed");
      return;
    }
    Eigen::SparseMatrix<double> d = rho * btb_;
    Eigen::SparseMatrix<double> eye(K, K);
    eye.setIdentity();
    d += rho * eye;
    sparse_ = std::make_unique<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>(d);
    if (sparse_->info() != Eigen::Success) throw NumericalError("ADMM sparse factorization failed");
    w_ = sparse_->solve(Eigen::MatrixXd(a_.transpose()));
    Eigen::MatrixXd c = a_sparse_ * w_;
    c.diagonal().array() += 0.5;
    small_.compute(c);
    if (small_.info() != Eigen::Success) throw NumericalError("ADMM Woodbury factorization failed");
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    if (!woodbury_) return dense_.solve(rhs);
    const Eigen::VectorXd t = sparse_->solve(rhs);
    return t - w_ * small_.solve(a_sparse_ * t);
  }

 private:
  const Eigen::MatrixXd& a_;
  Eigen::SparseMatrix<double> a_sparse_;
  const Eigen::SparseMatrix<double>& btb_;
  bool woodbury_ = false;
  Eigen::MatrixXd ata2_;
  Eigen::LLT<Eigen::MatrixXd> dense_;
  std::unique_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> sparse_;
  Eigen::MatrixXd w_;
  Eigen::LLT<Eigen::MatrixXd> small_;
};

constexpr int kMaxRefactors = 40;
constexpr int kAdaptEvery = 50;
constexpr int kCheckEvery = 5;
constexpr double kImbalance = 10.0;
constexpr double kRhoPerScale = 10.0;

// y = B x for a row-major B.
void b_times(const GroupOperator& op, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  const auto& b = op.b;
  const int* outer = b.outerIndexPtr();
  const int* inner = b.innerIndexPtr();
  const double* val = b.valuePtr();
  for (Eigen::Index r = 0; r < b.rows(); ++r) {
    double acc = 0.0;
    for (int p = outer[r]; p < outer[r + 1]; ++p) acc += val[p] * x[inner[p]];
    y[r] = acc;
  }
}

// y += B^T z.
void bt_times_add(const GroupOperator& op, const Eigen::VectorXd& z, Eigen::VectorXd& y) {
  const auto& b = op.b;
  const int* outer = b.outerIndexPtr();
  const int* inner = b.innerIndexPtr();
  const double* val = b.valuePtr();
  for (Eigen::Index r = 0; r < b.rows(); ++r) {
    const double zr = z[r];
    for (int p = outer[r]; p < outer[r + 1]; ++p) y[inner[p]] += val[p] * zr;
  }
}

}  // namespace

SolverResult regularized_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                               const RegularizerSpec& reg, const SolverOptions& options) {
  detail::check_problem(a, y);
  const int K = static_cast<int>(a.cols());
  reg.validate(K);
  if (options.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (reg.kind == RegularizerKind::kNone || reg.lambda == 0.0) return nnls_solve(a, y, options);

  const GroupOperator op = build_group_operator(reg, K);
  const Eigen::SparseMatrix<double> b = op.b;
  const Eigen::SparseMatrix<double> btb = Eigen::SparseMatrix<double>(b.transpose()) * b;
  const detail::LinearMap amap(a);
  const Eigen::Index m = b.rows();

  double rho = options.rho;
  if (rho <= 0.0) {
    // Scales with the mean group weight and the mean column energy of A.
    double mean_scale = 0.0;
    for (double s : op.scale) mean_scale += s;
    mean_scale /= std::max(1, op.num_groups());
    rho = kRhoPerScale * mean_scale * a.squaredNorm() / K;
    if (!(rho > 0.0) || !std::isfinite(rho)) rho = 1.0;
  }
  XUpdate xupdate(a, btb);
  xupdate.factor(rho);
  int refactors = 0;

  const Eigen::VectorXd aty2 = 2.0 * amap.apply_transpose(y);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(K);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(K);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(K);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd balpha(m), zhat(m), z_old(m), w_old(K), rhs(K), tmp(K);
  const double relax = options.relaxation;
  const int check_every = options.record_history ? 1 : kCheckEvery;

  SolverResult res;
  for (int it = 1; it <= options.max_iters; ++it) {
    const bool check = it % check_every == 0 || it == options.max_iters;
    rhs = w - v;
    zhat = z - u;
    bt_times_add(op, zhat, rhs);
    rhs = aty2 + rho * rhs;
    alpha = xupdate.solve(rhs);
    b_times(op, alpha, balpha);

    if (check) {
      z_old = z;
      w_old = w;
    }
    // Over-relaxed images of B alpha and alpha; zhat doubles as B alpha_r.
    zhat = relax * balpha + (1.0 - relax) * z;
    tmp = relax * alpha + (1.0 - relax) * w;
    u += zhat;
    for (int j = 0; j < op.num_groups(); ++j) {
      const int off = op.offsets[j];
      const int len = op.block_size(j);
      if (len == 0) continue;
      auto seg = u.segment(off, len);
      const double n = seg.norm();
      const double theta = op.scale[j] / rho;
      if (n <= theta) z.segment(off, len).setZero();
      else z.segment(off, len) = (1.0 - theta / n) * seg;
    }
    u -= z;
    v += tmp;
    w = v.cwiseMax(0.0);
    v -= w;

    res.iterations = it;
    if (!check) continue;

    const double r_pri = std::sqrt((balpha - z).squaredNorm() + (alpha - w).squaredNorm());
    rhs = w - w_old;
    bt_times_add(op, z - z_old, rhs);
    const double r_dual = rho * rhs.norm();
    const double primal_scale = std::max(std::sqrt(balpha.squaredNorm() + alpha.squaredNorm()),
                                         std::sqrt(z.squaredNorm() + w.squaredNorm()));
    rhs = v;
    bt_times_add(op, u, rhs);
    const double dual_scale = rho * rhs.norm();
    const double eps_pri = std::sqrt(static_cast<double>(m + K)) * options.abs_tol +
                           options.rel_tol * primal_scale;
    const double eps_dual = std::sqrt(static_cast<double>(K)) * options.abs_tol +
                            options.rel_tol * dual_scale;

    if (options.record_history) {
      res.history.push_back({it, objective_value(a, y, reg, w), std::max(r_pri / eps_pri, r_dual / eps_dual)});
    }
    if (r_pri <= eps_pri && r_dual <= eps_dual) {
      res.converged = true;
      break;
    }

    if (options.adapt_rho && it % kAdaptEvery == 0 && refactors < kMaxRefactors) {
      const double rp = r_pri / std::max(primal_scale, 1e-300);
      const double rd = r_dual / std::max(dual_scale, 1e-300);
      double factor = 1.0;
      if (rp > kImbalance * rd) factor = 2.0;
      else if (rd > kImbalance * rp) factor = 0.5;
      if (factor != 1.0) {
        rho *= factor;
        u /= factor;
        v /= factor;
        xupdate.factor(rho);
        ++refactors;
      }
    }
  }
  res.alpha_hat = w;
  res.objective = objective_value(a, y, reg, w);
  return res;
}

}  // namespace pilothop
