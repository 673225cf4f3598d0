#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pilothop/errors.hpp"
#include "pilothop/solvers.hpp"

using namespace pilothop;
using pilothop::testing::lawson_hanson;
using pilothop::testing::random_small_problem;
using pilothop::testing::ring_neighbors;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

SolverOptions tight() {
  SolverOptions o;
  o.rel_tol = 1e-9;
  o.max_iters = 200000;
  return o;
}

std::vector<std::vector<int>> three_groups() { return {{0, 1, 2, 3}, {4, 5, 6, 7}, {8, 9, 10, 11}}; }

}  // namespace

TEST(Prox, Examples) {
  EXPECT_TRUE(prox_group_l2(vec({3, 4}), 1.0).isApprox(vec({2.4, 3.2}), 1e-15));
  EXPECT_EQ(prox_group_l2(vec({3, 4}), 5.0).norm(), 0.0);
  EXPECT_EQ(prox_group_l2(vec({3, 4}), 6.0).norm(), 0.0);
  EXPECT_EQ(prox_group_l2(vec({0, 0}), 1.0).norm(), 0.0);
  EXPECT_TRUE(prox_group_l2(vec({-1, 2}), 0.0) == vec({-1, 2}));
  EXPECT_THROW(prox_group_l2(vec({1}), -1.0), ConfigError);
}

TEST(PowerIteration, MatchesSingularValue) {
  Rng rng(3);
  const auto p = random_small_problem(20, 30, rng);
  const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(p.a).singularValues()(0);
  EXPECT_NEAR(power_iteration_norm2(p.a, 500, 1e-12), s * s, 1e-6 * s * s);
}

TEST(Regularizer, Validation) {
  EXPECT_THROW(make_glasso({{0}, {}}, 1.0).validate(3), ConfigError);
  EXPECT_THROW(make_glasso({{0, 5}}, 1.0).validate(3), ConfigError);
  EXPECT_THROW(make_glasso({{0}}, -1.0).validate(3), ConfigError);
  EXPECT_THROW(make_tv({{0, 1}}, 1.0).validate(3), ConfigError);
  RegularizerSpec r = make_glasso({{0}, {1}}, 1.0);
  r.weights = {1.0};
  EXPECT_THROW(r.validate(2), ConfigError);
  EXPECT_THROW(regularizer_kind_from_string("lasso"), ConfigError);
  EXPECT_EQ(regularizer_kind_from_string("tv"), RegularizerKind::kTv);
  EXPECT_EQ(to_string(RegularizerKind::kGlasso), "glasso");
}

TEST(Regularizer, Values) {
  const Eigen::VectorXd a = vec({3, 4, 1});
  EXPECT_DOUBLE_EQ(regularizer_value(make_glasso({{0, 1}, {2}}, 2.0), a), 2.0 * (5.0 + 1.0));
  // Ring of three: each user contributes |(a_k - a_{k-1}, a_k - a_{k+1})|.
  const double tv = std::hypot(3 - 1, 3 - 4) + std::hypot(4 - 3, 4 - 1) + std::hypot(1 - 4, 1 - 3);
  EXPECT_NEAR(regularizer_value(make_tv(ring_neighbors(3), 1.0), a), tv, 1e-14);
  RegularizerSpec w = make_glasso({{0, 1}, {2}}, 1.0);
  w.weights = {2.0, 3.0};
  EXPECT_DOUBLE_EQ(regularizer_value(w, a), 13.0);
}

TEST(Nnls, IdentityExample) {
  const SolverResult r = nnls_solve(Eigen::MatrixXd::Identity(3, 3), vec({1, -1, 2}));
  EXPECT_TRUE(r.converged);
  EXPECT_LT((r.alpha_hat - vec({1, 0, 2})).norm(), 1e-12);
  EXPECT_NEAR(r.objective, 1.0, 1e-12);
}

TEST(Nnls, ZeroDataGivesZero) {
  const SolverResult r = nnls_solve(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2));
  EXPECT_EQ(r.alpha_hat.norm(), 0.0);
}

TEST(Nnls, MatchesLawsonHanson) {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto p = random_small_problem(40, 25, rng);
    const Eigen::VectorXd ref = lawson_hanson(p.a, p.y);
    const SolverResult r = nnls_solve(p.a, p.y);
    EXPECT_LT((r.alpha_hat - ref).norm(), 1e-6 * std::max(1.0, ref.norm())) << "rep " << rep;
    EXPECT_LT(kkt_residual(p.a, p.y, RegularizerSpec{}, r.alpha_hat), 1e-6);
  }
}

TEST(Nnls, InputErrors) {
  EXPECT_THROW(nnls_solve(Eigen::MatrixXd::Identity(3, 3), vec({1, 2})), DimensionError);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
  a(0, 0) = std::nan("");
  EXPECT_THROW(nnls_solve(a, vec({1, 2})), NumericalError);
}

TEST(Glasso, IdentitySingleGroup) {
  const SolverResult r =
      regularized_solve(Eigen::MatrixXd::Identity(2, 2), vec({3, 4}), make_glasso({{0, 1}}, 2.0), tight());
  EXPECT_LT((r.alpha_hat - vec({2.4, 3.2})).norm(), 1e-6);
}

TEST(Glasso, LargeLambdaZeroesEverything) {
  Rng rng(5);
  const auto p = random_small_problem(5, 12, rng);
  const Eigen::VectorXd g = (2.0 * p.a.transpose() * p.y).cwiseMax(0.0);
  double lam_max = 0.0;
  for (const auto& grp : three_groups()) {
    double s = 0.0;
    for (int k : grp) s += g[k] * g[k];
    lam_max = std::max(lam_max, std::sqrt(s));
  }
  const SolverResult r = regularized_solve(p.a, p.y, make_glasso(three_groups(), 1.5 * lam_max), tight());
  EXPECT_LT(r.alpha_hat.lpNorm<Eigen::Infinity>(), 1e-7);
}

TEST(Tv, IdentityPair) {
  const SolverResult r =
      regularized_solve(Eigen::MatrixXd::Identity(2, 2), vec({3, 1}), make_tv({{0, 1}, {1, 0}}, 0.5), tight());
  EXPECT_LT((r.alpha_hat - vec({2.5, 1.5})).norm(), 1e-6);
}

TEST(Tv, HugeLambdaGivesConstant) {
  Rng rng(6);
  const auto p = random_small_problem(15, 25, rng);
  const SolverResult r = regularized_solve(p.a, p.y, make_tv(ring_neighbors(25), 1e4), tight());
  const double spread = r.alpha_hat.maxCoeff() - r.alpha_hat.minCoeff();
  EXPECT_LT(spread, 1e-4 * std::max(1e-3, r.alpha_hat.mean()));
  // The constant is the best non-negative multiple of the all-ones vector.
  const Eigen::VectorXd s = p.a.rowwise().sum();
  const double c = std::max(0.0, s.dot(p.y) / s.squaredNorm());
  EXPECT_NEAR(r.alpha_hat.mean(), c, 1e-3 * std::max(1.0, c));
}

TEST(Admm, ZeroLambdaReducesToNnls) {
  Rng rng(7);
  const auto p = random_small_problem(40, 25, rng);
  const SolverResult base = nnls_solve(p.a, p.y);
  for (const RegularizerSpec& reg : {make_glasso({{0, 1, 2}, {3, 4}}, 0.0), make_tv(ring_neighbors(25), 0.0)}) {
    const SolverResult r = regularized_solve(p.a, p.y, reg);
    EXPECT_TRUE(r.alpha_hat == base.alpha_hat);
  }
}

TEST(Admm, AgreesWithSubgradientOracle) {
  Rng rng(8);
  for (int rep = 0; rep < 3; ++rep) {
    const auto p = random_small_problem(5, 12, rng);
    for (const RegularizerSpec& reg : {make_glasso(three_groups(), 0.2), make_tv(ring_neighbors(12), 0.2)}) {
      const SolverResult r = regularized_solve(p.a, p.y, reg, tight());
      Rng orng(100 + rep);
      const SolverResult o = subgradient_oracle(p.a, p.y, reg, 1000000, orng);
      const double fr = objective_value(p.a, p.y, reg, r.alpha_hat);
      EXPECT_LE(fr, o.objective * (1 + 1e-4) + 1e-12) << to_string(reg.kind) << " rep " << rep;
      EXPECT_GE(fr, o.objective * (1 - 1e-3) - 1e-12);
      EXPECT_LT(kkt_residual(p.a, p.y, reg, r.alpha_hat), 1e-5);
    }
  }
}

TEST(Admm, RhoDoesNotChangeTheAnswer) {
  Rng rng(9);
  const auto p = random_small_problem(15, 25, rng);
  const RegularizerSpec reg = make_tv(ring_neighbors(25), 0.3);
  SolverOptions a = tight();
  SolverOptions b = tight();
  a.rho = 0.5;
  b.rho = 20.0;
  b.adapt_rho = true;
  const Eigen::VectorXd xa = regularized_solve(p.a, p.y, reg, a).alpha_hat;
  const Eigen::VectorXd xb = regularized_solve(p.a, p.y, reg, b).alpha_hat;
  EXPECT_NEAR(objective_value(p.a, p.y, reg, xa), objective_value(p.a, p.y, reg, xb),
              1e-6 * objective_value(p.a, p.y, reg, xa));
}

TEST(Admm, RegularizerDecreasesWithLambda) {
  Rng rng(10);
  const auto p = random_small_problem(15, 25, rng);
  for (RegularizerKind kind : {RegularizerKind::kGlasso, RegularizerKind::kTv}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double lam : {0.01, 0.05, 0.1, 0.3, 1.0, 3.0}) {
      const RegularizerSpec reg = kind == RegularizerKind::kTv
                                      ? make_tv(ring_neighbors(25), lam)
                                      : make_glasso({{0, 1, 2, 3, 4}, {5, 6, 7, 8, 9}, {10, 11, 12, 13, 14},
                                                     {15, 16, 17, 18, 19}, {20, 21, 22, 23, 24}},
                                                    lam);
      const Eigen::VectorXd x = regularized_solve(p.a, p.y, reg, tight()).alpha_hat;
      const double unit = regularizer_value(reg, x) / lam;
      EXPECT_LE(unit, prev * (1 + 1e-5) + 1e-9) << to_string(kind) << " lambda " << lam;
      prev = unit;
    }
  }
}

TEST(Admm, ScaleInvariance) {
  Rng rng(12);
  const auto p = random_small_problem(15, 25, rng);
  const double s = 7.0;
  const Eigen::VectorXd x1 = regularized_solve(p.a, p.y, make_tv(ring_neighbors(25), 0.2), tight()).alpha_hat;
  const Eigen::VectorXd x2 =
      regularized_solve(s * p.a, s * p.y, make_tv(ring_neighbors(25), 0.2 * s * s), tight()).alpha_hat;
  EXPECT_LT((x1 - x2).norm(), 1e-5 * std::max(1.0, x1.norm()));
}

TEST(Admm, OutputIsNonNegative) {
  Rng rng(13);
  for (int rep = 0; rep < 5; ++rep) {
    const auto p = random_small_problem(15, 25, rng);
    const Eigen::VectorXd y = p.y - 0.5 * Eigen::VectorXd::Ones(p.y.size());
    EXPECT_GE(regularized_solve(p.a, y, make_glasso(three_groups(), 0.1)).alpha_hat.minCoeff(), 0.0);
    EXPECT_GE(regularized_solve(p.a, y, make_tv(ring_neighbors(25), 0.1)).alpha_hat.minCoeff(), 0.0);
  }
}

TEST(Admm, HistoryCsv) {
  SolverOptions o;
  o.record_history = true;
  const SolverResult r =
      regularized_solve(Eigen::MatrixXd::Identity(2, 2), vec({3, 1}), make_tv({{0, 1}, {1, 0}}, 0.5), o);
  ASSERT_FALSE(r.history.empty());
  const std::string csv = history_csv(r);
  EXPECT_EQ(csv.rfind("iteration,objective,residual\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(r.history.size()) + 1);
}

TEST(Kkt, ZeroAtOptimumPositiveElsewhere) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::VectorXd y = vec({1, -1, 2});
  EXPECT_LT(kkt_residual(a, y, RegularizerSpec{}, vec({1, 0, 2})), 1e-14);
  // Gradient 2(alpha - y) = (0.2, 2, 0) with alpha_1 = 0 allowed to push up.
  EXPECT_NEAR(kkt_residual(a, y, RegularizerSpec{}, vec({1.1, 0, 2})), 0.2, 1e-12);
  EXPECT_NEAR(kkt_residual(a, y, RegularizerSpec{}, vec({1, 0.5, 2})), 3.0, 1e-12);
  // At the kink the subgradient set absorbs the gradient.
  EXPECT_LT(kkt_residual(Eigen::MatrixXd::Identity(2, 2), vec({3, 4}), make_glasso({{0, 1}}, 20.0), vec({0, 0})),
            1e-8);
  EXPECT_THROW(kkt_residual(a, y, RegularizerSpec{}, vec({1, 2})), DimensionError);
  EXPECT_THROW(kkt_residual(a, y, RegularizerSpec{}, vec({1, -1, 2})), ConfigError);
}
