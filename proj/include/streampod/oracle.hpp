/******************************************************************************
 *
 * Copyright (c) 2026, the streampod project developers.
 *
 * SPDX-License-Identifier: Apache-2.0
 *
 *****************************************************************************/

#ifndef STREAMPOD_ORACLE_HPP
#define STREAMPOD_ORACLE_HPP

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "streampod/incremental_svd.hpp"
#include "streampod/mass_matrix.hpp"
#include "streampod/time_grid.hpp"
#include "streampod/weighted.hpp"

namespace streampod {

/// Inner product on the domain side of a core SVD.
enum class RightWeight { Delta, Identity };

/// Exact batch core SVD of a weighted data matrix: A = V S W^* with
/// M-orthonormal left vectors and right vectors orthonormal under
/// right_weight. Only strictly positive singular values are kept.
struct CoreSvd {
  Eigen::MatrixXd left_vectors;
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd right_vectors;
  RightWeight right_weight = RightWeight::Delta;

  Eigen::Index rank() const { return singular_values.size(); }
};

/// Relative cutoff defining "positive" singular values in floating point:
/// values at or below kRankCutRelative * sigma_max are discarded.
constexpr double kRankCutRelative = 1e-12;

namespace detail {

/// Cholesky reduction to a standard dense SVD. With M = L L^T the matrix
/// B = L^T U Delta^{1/2} has the same singular values as both weighted
/// problems; V = L^{-T} V_B is M-orthonormal and W_B is the plain right
/// factor, rescaled by Delta^{-1/2} when the domain carries the Delta
/// inner product.
inline CoreSvd weighted_batch_svd(const Eigen::MatrixXd& u, const MassMatrix& mass,
                                  const TimeGrid& grid, RightWeight right_weight) {
  if (u.rows() != mass.dim())
    throw std::invalid_argument("batch core SVD: row count does not match mass matrix");
  if (u.cols() != grid.steps())
    throw std::invalid_argument("batch core SVD: column count does not match grid");

  const Eigen::MatrixXd chol_lower = cholesky_spd(mass);
  const Eigen::MatrixXd scaled = scale_columns_sqrt_delta(u, grid);
  const Eigen::MatrixXd reduced = chol_lower.transpose() * scaled;
  const SmallSvd svd = svd_sign_fixed(reduced);

  Eigen::Index rank = 0;
  if (svd.values.size() > 0) {
    const double cut = kRankCutRelative * svd.values(0);
    while (rank < svd.values.size() && svd.values(rank) > cut) ++rank;
  }

  CoreSvd core;
  core.right_weight = right_weight;
  core.singular_values = svd.values.head(rank);
  core.left_vectors = chol_lower.transpose()
                          .triangularView<Eigen::Upper>()
                          .solve(svd.left.leftCols(rank));
  core.right_vectors = svd.right.leftCols(rank);
  if (right_weight == RightWeight::Delta)
    core.right_vectors =
        grid.deltas().cwiseSqrt().cwiseInverse().asDiagonal() * core.right_vectors;
  return core;
}

}  // namespace detail

/// Core SVD of U Delta with Delta-weighted domain and M-weighted range.
inline CoreSvd batch_core_svd_two_weight(const Eigen::MatrixXd& u, const MassMatrix& mass,
                                         const TimeGrid& grid) {
  return detail::weighted_batch_svd(u, mass, grid, RightWeight::Delta);
}

/// Core SVD of U Delta^{1/2} with plain domain and M-weighted range. The
/// right factor here equals Delta^{1/2} times the two-weight right factor.
inline CoreSvd batch_core_svd_one_weight(const Eigen::MatrixXd& u, const MassMatrix& mass,
                                         const TimeGrid& grid) {
  return detail::weighted_batch_svd(u, mass, grid, RightWeight::Identity);
}

/// Residuals and defects of a candidate core SVD against its defining
/// equations A W = V S and A* V = W S, plus both orthonormality defects and
/// the ordering/positivity of the singular values. All residuals are
/// relative; passed is true iff everything is at or below the tolerance the
/// report was built with.
struct VerifyReport {
  double forward_residual = 0.0;    ///< |A W - V S|_F / |A|_F
  double adjoint_residual = 0.0;    ///< |A* V - W S|_F / |A*|_F
  double left_defect = 0.0;         ///< max |V^T M V - I|
  double right_defect = 0.0;        ///< max |W^T R W - I|
  double ordering_defect = 0.0;     ///< max growth of sigma_{i+1} over sigma_i, / sigma_1
  bool all_positive = true;
  double tol_check = 0.0;
  bool passed = false;

  double worst() const {
    double w = forward_residual;
    if (adjoint_residual > w) w = adjoint_residual;
    if (left_defect > w) w = left_defect;
    if (right_defect > w) w = right_defect;
    if (ordering_defect > w) w = ordering_defect;
    return w;
  }
};

/// Check a candidate against the data it claims to factor. The operator is
/// A = U Delta (Delta right weight) or A = U Delta^{1/2} (identity right
/// weight), selected by the candidate's own tag.
inline VerifyReport verify_core_svd(const Eigen::MatrixXd& u, const MassMatrix& mass,
                                    const TimeGrid& grid, const CoreSvd& candidate,
                                    double tol_check) {
  if (u.rows() != mass.dim() || u.cols() != grid.steps())
    throw std::invalid_argument("verify_core_svd: data shape mismatch");
  if (candidate.left_vectors.rows() != u.rows() ||
      candidate.right_vectors.rows() != u.cols() ||
      candidate.left_vectors.cols() != candidate.rank() ||
      candidate.right_vectors.cols() != candidate.rank())
    throw std::invalid_argument("verify_core_svd: candidate shape mismatch");

  const bool delta_weighted = candidate.right_weight == RightWeight::Delta;
  const Eigen::VectorXd deltas = grid.deltas();
  const Eigen::MatrixXd a = delta_weighted
                                ? Eigen::MatrixXd(u * deltas.asDiagonal())
                                : scale_columns_sqrt_delta(u, grid);
  // A* = R^{-1} A^T M with R the domain weight
  Eigen::MatrixXd a_star = a.transpose() * mass.dense();
  if (delta_weighted) a_star = deltas.cwiseInverse().asDiagonal() * a_star;

  const Eigen::MatrixXd sigma = candidate.singular_values.asDiagonal();
  const double a_norm = a.norm();
  const double a_star_norm = a_star.norm();

  VerifyReport report;
  report.tol_check = tol_check;
  report.forward_residual = (a * candidate.right_vectors - candidate.left_vectors * sigma).norm();
  if (a_norm > 0.0) report.forward_residual /= a_norm;
  report.adjoint_residual = (a_star * candidate.left_vectors - candidate.right_vectors * sigma).norm();
  if (a_star_norm > 0.0) report.adjoint_residual /= a_star_norm;

  const Eigen::Index k = candidate.rank();
  if (k > 0) {
    report.left_defect =
        (candidate.left_vectors.transpose() * mass.apply_matrix(candidate.left_vectors) -
         Eigen::MatrixXd::Identity(k, k))
            .cwiseAbs()
            .maxCoeff();
    Eigen::MatrixXd right_gram;
    if (delta_weighted)
      right_gram =
          candidate.right_vectors.transpose() * deltas.asDiagonal() * candidate.right_vectors;
    else
      right_gram = candidate.right_vectors.transpose() * candidate.right_vectors;
    report.right_defect =
        (right_gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
  }

  for (Eigen::Index i = 0; i + 1 < k; ++i) {
    const double rise = candidate.singular_values(i + 1) - candidate.singular_values(i);
    if (rise > report.ordering_defect) report.ordering_defect = rise;
  }
  if (k > 0 && candidate.singular_values(0) > 0.0)
    report.ordering_defect /= candidate.singular_values(0);
  report.all_positive = (k == 0) || (candidate.singular_values.minCoeff() > 0.0);

  report.passed = report.all_positive && report.worst() <= tol_check;
  return report;
}

}  // namespace streampod

#endif  // STREAMPOD_ORACLE_HPP
