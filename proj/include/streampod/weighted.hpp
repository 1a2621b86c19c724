/******************************************************************************
 *
 * Copyright (c) 2026, the streampod project developers.
 *
 * SPDX-License-Identifier: Apache-2.0
 *
 *****************************************************************************/

#ifndef STREAMPOD_WEIGHTED_HPP
#define STREAMPOD_WEIGHTED_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "streampod/mass_matrix.hpp"
#include "streampod/time_grid.hpp"

namespace streampod {

/// (x, y)_M = y^T M x. Symmetric in its vector arguments since M is.
inline double weighted_inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                             const MassMatrix& mass) {
  if (x.size() != mass.dim() || y.size() != mass.dim())
    throw std::invalid_argument("weighted_inner: dimension mismatch");
  return y.dot(mass.apply(x));
}

/// sqrt(|x^T M x|). The absolute value guards against round-off making the
/// quadratic form slightly negative for near-null vectors; it is applied
/// unconditionally.
inline double weighted_norm(const Eigen::VectorXd& x, const MassMatrix& mass) {
  return std::sqrt(std::abs(weighted_inner(x, x, mass)));
}

/// Hilbert adjoint action for A viewed as a map between the step-weighted
/// and mass-weighted spaces: returns Delta^{-1} A^T M y, the vector A* y.
/// Satisfies (A x, y)_M = (x, A* y)_Delta for all conforming x.
inline Eigen::VectorXd apply_weighted_adjoint(const Eigen::MatrixXd& a,
                                              const MassMatrix& mass,
                                              const TimeGrid& grid,
                                              const Eigen::VectorXd& y) {
  if (a.rows() != mass.dim() || y.size() != mass.dim() || a.cols() != grid.steps())
    throw std::invalid_argument("apply_weighted_adjoint: dimension mismatch");
  return grid.deltas().cwiseInverse().asDiagonal() * (a.transpose() * mass.apply(y));
}

/// Modified M-weighted Gram-Schmidt with one full reorthogonalization pass
/// per column (project, normalize, project again, normalize again). Columns
/// come back M-orthonormal with the span preserved up to round-off.
///
/// Throws if a column drops below norm 1e-14 after projection: the input was
/// numerically rank deficient in the M inner product.
inline Eigen::MatrixXd modified_gs_weighted(const Eigen::MatrixXd& v, const MassMatrix& mass) {
  if (v.rows() != mass.dim())
    throw std::invalid_argument("modified_gs_weighted: dimension mismatch");
  constexpr double kRankTol = 1e-14;
  Eigen::MatrixXd q = v;
  Eigen::MatrixXd mq(q.rows(), q.cols());  // cache of M * finished columns
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < j; ++i)
        q.col(j) -= mq.col(i).dot(q.col(j)) * q.col(i);
      const double nrm = std::sqrt(std::abs(q.col(j).dot(mass.apply(q.col(j)))));
      if (nrm < kRankTol)
        throw std::runtime_error("modified_gs_weighted: rank-deficient column " +
                                 std::to_string(j));
      q.col(j) /= nrm;
    }
    mq.col(j) = mass.apply(q.col(j));
  }
  return q;
}

/// Dense lower-triangular Cholesky factor, A = L L^T.
inline Eigen::MatrixXd cholesky_spd(const Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("cholesky_spd: not positive definite");
  return llt.matrixL();
}

inline Eigen::MatrixXd cholesky_spd(const MassMatrix& mass) {
  return cholesky_spd(mass.dense());
}

/// U diag(sqrt(delta_1)..sqrt(delta_s)): scales column j by sqrt(delta_j).
/// The Riemann-sum reduction and the batch SVDs share this exact routine so
/// the two pathways operate on bitwise-identical matrices.
inline Eigen::MatrixXd scale_columns_sqrt_delta(const Eigen::MatrixXd& u, const TimeGrid& grid) {
  if (u.cols() != grid.steps())
    throw std::invalid_argument("scale_columns_sqrt_delta: column count does not match grid");
  Eigen::MatrixXd scaled = u;
  for (Eigen::Index j = 0; j < scaled.cols(); ++j)
    scaled.col(j) *= std::sqrt(grid.delta(j));
  return scaled;
}

}  // namespace streampod

#endif  // STREAMPOD_WEIGHTED_HPP
