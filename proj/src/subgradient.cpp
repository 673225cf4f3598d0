#include <cmath>

#include "linear_map.hpp"
#include "pilothop/errors.hpp"
#include "pilothop/solvers.hpp"

namespace pilothop {

SolverResult subgradient_oracle(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                                const RegularizerSpec& reg, long iters, Rng& rng) {
  detail::check_problem(a, y);
  const int K = static_cast<int>(a.cols());
  reg.validate(K);
  if (iters < 1) throw ConfigError("iters must be >= 1");

  const detail::LinearMap amap(a);
  const GroupOperator op = build_group_operator(reg, K);
  const Eigen::SparseMatrix<double> b = op.b;
  const bool regularized = reg.kind != RegularizerKind::kNone && reg.lambda > 0.0;

  const double lip = 2.0 * power_iteration_norm2(a, 200, 1e-12) * 1.05 + 1e-12;
  const double s0 = 1.0 / lip;
  // Steps stay near 1/L for the first kWarm iterations, then decay as 1/sqrt(t).
  constexpr double kWarm = 1000.0;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd x(K);
  for (int k = 0; k < K; ++k) x(k) = unit(rng);

  SolverResult res;
  res.objective = std::numeric_limits<double>::infinity();
  Eigen::VectorXd bx;
  for (long t = 0; t <= iters; ++t) {
    const Eigen::VectorXd r = amap.apply(x) - y;
    Eigen::VectorXd g = 2.0 * amap.apply_transpose(r);
    double f = r.squaredNorm();
    if (regularized) {
      bx = b * x;
      Eigen::VectorXd dir = Eigen::VectorXd::Zero(bx.size());
      for (int j = 0; j < op.num_groups(); ++j) {
        const int off = op.offsets[j];
        const int len = op.block_size(j);
        const double n = bx.segment(off, len).norm();
        f += op.scale[j] * n;
        if (n > 0.0) dir.segment(off, len) = op.scale[j] * bx.segment(off, len) / n;
      }
      g += b.transpose() * dir;
    }
    if (f < res.objective) {
      res.objective = f;
      res.alpha_hat = x;
    }
    if (t == iters) break;
    const double step = s0 / std::sqrt(1.0 + static_cast<double>(t) / kWarm);
    x = (x - step * g).cwiseMax(0.0);
  }
  res.iterations = static_cast<int>(std::min<long>(iters, std::numeric_limits<int>::max()));
  res.converged = true;
  return res;
}

}  // namespace pilothop
