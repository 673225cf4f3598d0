#include <cmath>
#include <vector>

#include <Eigen/QR>

#include "linear_map.hpp"
#include "pilothop/errors.hpp"
#include "pilothop/solvers.hpp"

namespace pilothop {

namespace detail {

void check_problem(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
  if (a.rows() != y.size()) throw DimensionError("A has " + std::to_string(a.rows()) +
                                                 " rows but y has length " + std::to_string(y.size()));
  if (a.cols() == 0) throw DimensionError("A has no columns");
  if (!a.allFinite() || !y.allFinite()) throw NumericalError("non-finite entries in A or y");
}

}  // namespace detail

namespace {

// Least squares restricted to the (thresholded) support of the first-order
// solution. A candidate replaces the iterate when it is strictly positive on
// its support and does not raise the objective.
void polish_on_support(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, SolverResult& res) {
  const double top = res.alpha_hat.maxCoeff();
  if (!(top > 0.0)) return;
  Eigen::VectorXd best = res.alpha_hat;
  double best_f = res.objective;
  for (double cut : {0.0, 1e-8, 1e-6, 1e-4, 1e-2}) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index k = 0; k < res.alpha_hat.size(); ++k) {
      if (res.alpha_hat[k] > cut * top) support.push_back(k);
    }
    if (support.empty() || static_cast<Eigen::Index>(support.size()) > a.rows()) continue;
    Eigen::MatrixXd as(a.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t j = 0; j < support.size(); ++j) as.col(static_cast<Eigen::Index>(j)) = a.col(support[j]);
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(as);
    if (qr.rank() < as.cols()) continue;
    const Eigen::VectorXd xs = qr.solve(y);
    if (!xs.allFinite() || (xs.array() <= 0.0).any()) continue;
    const double f = (as * xs - y).squaredNorm();
    if (!(f <= best_f)) continue;
    best.setZero();
    for (std::size_t j = 0; j < support.size(); ++j) best[support[j]] = xs[static_cast<Eigen::Index>(j)];
    best_f = f;
  }
  res.alpha_hat = best;
  res.objective = best_f;
}

}  // namespace

SolverResult nnls_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, const SolverOptions& options) {
  detail::check_problem(a, y);
  if (options.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  const detail::LinearMap op(a);
  const Eigen::Index K = a.cols();

  SolverResult res;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(K);
  Eigen::VectorXd ax = Eigen::VectorXd::Zero(a.rows());

  double lip = 2.0 * power_iteration_norm2(a);
  const double grad0 = 2.0 * op.apply_transpose(y).norm();
  const double stop = options.nnls_rel_tol * grad0 + options.abs_tol;
  if (lip == 0.0 || grad0 == 0.0) {
    res.alpha_hat = x;
    res.objective = y.squaredNorm();
    res.converged = true;
    return res;
  }

  Eigen::VectorXd z = x;
  Eigen::VectorXd az = ax;
  double theta = 1.0;
  for (int it = 1; it <= options.max_iters; ++it) {
    const Eigen::VectorXd rz = az - y;
    const double fz = rz.squaredNorm();
    const Eigen::VectorXd grad = 2.0 * op.apply_transpose(rz);

    Eigen::VectorXd xn, axn, d;
    double fxn = 0.0;
    for (;;) {
      xn = (z - grad / lip).cwiseMax(0.0);
      axn = op.apply(xn);
      fxn = (axn - y).squaredNorm();
      d = xn - z;
      const double model = fz + grad.dot(d) + 0.5 * lip * d.squaredNorm();
      if (fxn <= model + 1e-12 * std::abs(fz)) break;
      lip *= 2.0;
    }

    const double mapping = lip * d.norm();
    res.iterations = it;
    if (options.record_history) res.history.push_back({it, fxn, mapping});

    // Restart momentum when the step points against the previous direction.
    double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    if ((z - xn).dot(xn - x) > 0.0) {
      theta = 1.0;
      theta_next = 1.0;
    }
    const double beta = (theta - 1.0) / theta_next;
    z = xn + beta * (xn - x);
    az = axn + beta * (axn - ax);
    x = std::move(xn);
    ax = std::move(axn);
    theta = theta_next;

    if (mapping <= stop) {
      res.converged = true;
      break;
    }
  }
  res.alpha_hat = x;
  res.objective = (ax - y).squaredNorm();
  polish_on_support(a, y, res);
  return res;
}

}  // namespace pilothop
