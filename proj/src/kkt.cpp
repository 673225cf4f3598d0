#include <algorithm>
#include <cmath>
#include <vector>

#include "linear_map.hpp"
#include "pilothop/errors.hpp"
#include "pilothop/solvers.hpp"

namespace pilothop {

namespace {

// Component of a subgradient that violates optimality: all of it on free
// coordinates, only the negative part on coordinates held at zero.
Eigen::VectorXd violation(const Eigen::VectorXd& s, const std::vector<char>& at_zero) {
  Eigen::VectorXd out = s;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (at_zero[k]) out(k) = std::min(out(k), 0.0);
  }
  return out;
}

}  // namespace

double kkt_residual(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, const RegularizerSpec& reg,
                    const Eigen::VectorXd& alpha_hat, const KktOptions& options) {
  detail::check_problem(a, y);
  const int K = static_cast<int>(a.cols());
  if (alpha_hat.size() != K) throw DimensionError("alpha_hat length must equal K");
  if ((alpha_hat.array() < 0.0).any()) throw ConfigError("alpha_hat must be non-negative");
  reg.validate(K);

  const double tol = options.zero_tol * std::max(1.0, alpha_hat.lpNorm<Eigen::Infinity>());
  std::vector<char> at_zero(K);
  for (int k = 0; k < K; ++k) at_zero[k] = alpha_hat(k) <= tol;

  const detail::LinearMap amap(a);
  Eigen::VectorXd g = 2.0 * amap.apply_transpose(amap.apply(alpha_hat) - y);

  // Smooth groups contribute their gradient; groups at the kink contribute
  // scale_j * B_j^T u_j with |u_j| <= 1 chosen to minimise the violation.
  std::vector<Eigen::Triplet<double>> kink_entries;
  std::vector<int> kink_offsets{0};
  if (reg.kind != RegularizerKind::kNone && reg.lambda > 0.0) {
    const GroupOperator op = build_group_operator(reg, K);
    const Eigen::VectorXd balpha = op.b * alpha_hat;
    const Eigen::SparseMatrix<double> bt = op.b.transpose();
    for (int j = 0; j < op.num_groups(); ++j) {
      const int off = op.offsets[j];
      const int len = op.block_size(j);
      if (len == 0) continue;
      const double n = balpha.segment(off, len).norm();
      if (n > tol) {
        for (int r = off; r < off + len; ++r) {
          for (Eigen::SparseMatrix<double>::InnerIterator itc(bt, r); itc; ++itc) {
            g(itc.row()) += op.scale[j] * itc.value() * balpha(r) / n;
          }
        }
      } else {
        const int base = kink_offsets.back();
        for (int r = off; r < off + len; ++r) {
          for (Eigen::SparseMatrix<double>::InnerIterator itc(bt, r); itc; ++itc) {
            kink_entries.emplace_back(static_cast<int>(itc.row()), base + (r - off),
                                      op.scale[j] * itc.value());
          }
        }
        kink_offsets.push_back(base + len);
      }
    }
  }

  if (kink_offsets.size() == 1) return violation(g, at_zero).norm();

  const int nu = kink_offsets.back();
  Eigen::SparseMatrix<double> c(K, nu);
  c.setFromTriplets(kink_entries.begin(), kink_entries.end());

  // |C|_2^2 <= |C|_1 |C|_inf gives a safe step for projected FISTA on
  // h(u) = 0.5 |violation(g + C u)|^2.
  const Eigen::VectorXd col_sums = Eigen::RowVectorXd::Ones(K) * c.cwiseAbs();
  const Eigen::VectorXd row_sums = c.cwiseAbs() * Eigen::VectorXd::Ones(nu);
  const double lip = std::max(col_sums.maxCoeff() * row_sums.maxCoeff(), 1e-300);

  auto project = [&](Eigen::VectorXd& u) {
    for (std::size_t j = 0; j + 1 < kink_offsets.size(); ++j) {
      const int off = kink_offsets[j];
      const int len = kink_offsets[j + 1] - off;
      const double n = u.segment(off, len).norm();
      if (n > 1.0) u.segment(off, len) /= n;
    }
  };

  Eigen::VectorXd u = Eigen::VectorXd::Zero(nu);
  Eigen::VectorXd p = u;
  double best = violation(g, at_zero).norm();
  double theta = 1.0;
  for (int it = 0; it < options.inner_iters && best > options.inner_tol; ++it) {
    const Eigen::VectorXd r = violation(g + c * p, at_zero);
    Eigen::VectorXd un = p - (c.transpose() * r) / lip;
    project(un);
    const double val = violation(g + c * un, at_zero).norm();
    best = std::min(best, val);
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    const bool restart = (p - un).dot(un - u) > 0.0;
    p = restart ? un : Eigen::VectorXd(un + ((theta - 1.0) / theta_next) * (un - u));
    theta = restart ? 1.0 : theta_next;
    u = std::move(un);
  }
  return best;
}

}  // namespace pilothop
