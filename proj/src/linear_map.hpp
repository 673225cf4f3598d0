#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace pilothop::detail {

// A with products routed through a sparse copy when A is mostly zeros
// (measurement matrices have T nonzeros per column).
class LinearMap {
 public:
  explicit LinearMap(const Eigen::MatrixXd& a) : dense_(a) {
    const double nnz = static_cast<double>((a.array() != 0.0).count());
    sparse_path_ = a.size() > 0 && nnz < 0.25 * static_cast<double>(a.size());
    if (sparse_path_) sparse_ = a.sparseView();
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    return sparse_path_ ? Eigen::VectorXd(sparse_ * x) : Eigen::VectorXd(dense_ * x);
  }
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& r) const {
    return sparse_path_ ? Eigen::VectorXd(sparse_.transpose() * r)
                        : Eigen::VectorXd(dense_.transpose() * r);
  }

  const Eigen::MatrixXd& dense() const { return dense_; }
  Eigen::Index rows() const { return dense_.rows(); }
  Eigen::Index cols() const { return dense_.cols(); }

 private:
  const Eigen::MatrixXd& dense_;
  Eigen::SparseMatrix<double> sparse_;
  bool sparse_path_ = false;
};

void check_problem(const Eigen::MatrixXd& a, const Eigen::VectorXd& y);

}  // namespace pilothop::detail
