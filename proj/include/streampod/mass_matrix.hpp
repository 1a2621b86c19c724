/******************************************************************************
 *
 * Copyright (c) 2026, the streampod project developers.
 *
 * SPDX-License-Identifier: Apache-2.0
 *
 *****************************************************************************/

#ifndef STREAMPOD_MASS_MATRIX_HPP
#define STREAMPOD_MASS_MATRIX_HPP

#include <stdexcept>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace streampod {

/// Symmetric positive definite Gram matrix of the spatial basis functions.
///
/// Accepts dense or compressed sparse symmetric storage; every weighted
/// operation in the library treats both uniformly. Symmetry (exact, as
/// stored) and positive definiteness (a Cholesky probe) are enforced at
/// construction, so a live MassMatrix is always a valid inner product.
class MassMatrix {
 public:
  explicit MassMatrix(Eigen::MatrixXd entries) : dense_(std::move(entries)) {
    if (dense_.rows() != dense_.cols() || dense_.rows() == 0)
      throw std::invalid_argument("mass matrix must be square and nonempty");
    if ((dense_ - dense_.transpose()).cwiseAbs().maxCoeff() != 0.0)
      throw std::invalid_argument("mass matrix must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> probe(dense_);
    if (probe.info() != Eigen::Success)
      throw std::runtime_error("mass matrix is not positive definite");
  }

  explicit MassMatrix(Eigen::SparseMatrix<double> entries)
      : sparse_(true), sparse_mat_(std::move(entries)) {
    if (sparse_mat_.rows() != sparse_mat_.cols() || sparse_mat_.rows() == 0)
      throw std::invalid_argument("mass matrix must be square and nonempty");
    sparse_mat_.makeCompressed();
    Eigen::SparseMatrix<double> skew =
        sparse_mat_ - Eigen::SparseMatrix<double>(sparse_mat_.transpose());
    skew.prune(1.0, 0.0);  // keep entries with |v| > 0
    if (skew.nonZeros() != 0)
      throw std::invalid_argument("mass matrix must be symmetric");
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> probe(sparse_mat_);
    if (probe.info() != Eigen::Success)
      throw std::runtime_error("mass matrix is not positive definite");
  }

  static MassMatrix identity(Eigen::Index dim) {
    return MassMatrix(Eigen::MatrixXd(Eigen::MatrixXd::Identity(dim, dim)));
  }

  Eigen::Index dim() const { return sparse_ ? sparse_mat_.rows() : dense_.rows(); }
  bool is_sparse() const { return sparse_; }

  /// M x
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    if (x.size() != dim())
      throw std::invalid_argument("mass matrix apply: dimension mismatch");
    return sparse_ ? Eigen::VectorXd(sparse_mat_ * x) : Eigen::VectorXd(dense_ * x);
  }

  /// M X, column by column
  Eigen::MatrixXd apply_matrix(const Eigen::MatrixXd& x) const {
    if (x.rows() != dim())
      throw std::invalid_argument("mass matrix apply: dimension mismatch");
    return sparse_ ? Eigen::MatrixXd(sparse_mat_ * x) : Eigen::MatrixXd(dense_ * x);
  }

  /// Materialized dense view (intended for the desk-scale batch oracle).
  Eigen::MatrixXd dense() const {
    return sparse_ ? Eigen::MatrixXd(sparse_mat_) : dense_;
  }

 private:
  bool sparse_ = false;
  Eigen::MatrixXd dense_;
  Eigen::SparseMatrix<double> sparse_mat_;
};

}  // namespace streampod

#endif  // STREAMPOD_MASS_MATRIX_HPP
