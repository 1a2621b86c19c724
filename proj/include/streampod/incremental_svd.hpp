/******************************************************************************
 *
 * Copyright (c) 2026, the streampod project developers.
 *
 * SPDX-License-Identifier: Apache-2.0
 *
 *****************************************************************************/

#ifndef STREAMPOD_INCREMENTAL_SVD_HPP
#define STREAMPOD_INCREMENTAL_SVD_HPP

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "streampod/mass_matrix.hpp"
#include "streampod/time_grid.hpp"
#include "streampod/weighted.hpp"

namespace streampod {

/// Which weighted matrix the state tracks.
///
/// TwoWeight maintains a core SVD of U Delta (step-weighted domain, so the
/// right vectors are Delta-orthonormal). OneWeight maintains a core SVD of
/// U Delta^{1/2} (plain domain, right vectors orthonormal). The two runs on
/// the same snapshot stream produce the same singular values and left
/// vectors, and right vectors related by W_one = Delta^{1/2} W_two.
enum class SvdVariant { TwoWeight, OneWeight };

enum class UpdateBranch {
  RankIncrease,  ///< new direction admitted, rank grows by one
  TruncationI,   ///< weighted residual below tol, rank unchanged
  RankCap        ///< rank already equals the space dimension, rank unchanged
};

struct IncrementalConfig {
  /// Linear-dependence tolerance for Truncation I. Zero disables the test
  /// and makes every update exact (rank grows until it hits the dimension).
  double tol = 1e-10;
  /// Singular values at or below this are discarded after each update
  /// (Truncation II). Zero keeps everything.
  double tol_sv = 0.0;
  /// When false, right singular vectors are not maintained (saves memory;
  /// temporal functions and reconstruction become unavailable).
  bool track_right_vectors = true;

  void validate() const {
    if (!(tol >= 0.0)) throw std::invalid_argument("tol must be nonnegative");
    if (!(tol_sv >= 0.0)) throw std::invalid_argument("tol_sv must be nonnegative");
  }
};

/// Which branch an update took, whether the corrective Gram-Schmidt pass
/// ran, and how many singular triplets Truncation II removed.
struct UpdateReport {
  UpdateBranch branch = UpdateBranch::RankIncrease;
  bool reorthogonalized = false;
  Eigen::Index truncated_count = 0;
};

/// Running tally of update branches across a stream.
struct BranchCounts {
  long rank_increase = 0;
  long truncation_i = 0;
  long rank_cap = 0;

  void add(UpdateBranch b) {
    switch (b) {
      case UpdateBranch::RankIncrease: ++rank_increase; break;
      case UpdateBranch::TruncationI: ++truncation_i; break;
      case UpdateBranch::RankCap: ++rank_cap; break;
    }
  }
  long total() const { return rank_increase + truncation_i + rank_cap; }
};

/// Current truncated core SVD of the processed snapshot stream.
///
/// left_vectors (m x k) are M-orthonormal; singular_values (k) are positive
/// and nonincreasing; right_vectors (l x k) are Delta-orthonormal for the
/// TwoWeight variant and plainly orthonormal for OneWeight, where l is the
/// number of columns processed so far. delta_log records every step size in
/// arrival order (the diagonal of Delta).
struct SvdState {
  SvdVariant variant = SvdVariant::TwoWeight;
  Eigen::MatrixXd left_vectors;
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd right_vectors;  // 0 x 0 when right vectors are not tracked
  std::vector<double> delta_log;
  bool tracks_right = true;

  Eigen::Index space_dim() const { return left_vectors.rows(); }
  Eigen::Index rank() const { return singular_values.size(); }
  Eigen::Index columns_seen() const { return static_cast<Eigen::Index>(delta_log.size()); }

  Eigen::VectorXd deltas() const {
    return Eigen::Map<const Eigen::VectorXd>(delta_log.data(),
                                             static_cast<Eigen::Index>(delta_log.size()));
  }
};

namespace detail {

struct SmallSvd {
  Eigen::MatrixXd left;
  Eigen::VectorXd values;
  Eigen::MatrixXd right;
};

/// Thin dense SVD with a deterministic sign convention: the largest-magnitude
/// entry of each left singular vector is made positive (right vector flipped
/// along with it). Keeps independently computed SVDs of the same matrix
/// comparable entrywise instead of up to sign.
inline SmallSvd svd_sign_fixed(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SmallSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  for (Eigen::Index j = 0; j < out.left.cols(); ++j) {
    Eigen::Index idx = 0;
    out.left.col(j).cwiseAbs().maxCoeff(&idx);
    if (out.left(idx, j) < 0.0) {
      out.left.col(j) = -out.left.col(j);
      out.right.col(j) = -out.right.col(j);
    }
  }
  return out;
}

/// blkdiag(w, corner)
inline Eigen::MatrixXd expand_right_block(const Eigen::MatrixXd& w, double corner) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(w.rows() + 1, w.cols() + 1);
  out.topLeftCorner(w.rows(), w.cols()) = w;
  out(w.rows(), w.cols()) = corner;
  return out;
}

}  // namespace detail

/// Middle matrix of the update step. Full shape (rank growth):
///   [ diag(s)  alpha d ]
///   [   0      alpha p ]
/// Truncated shape (no rank growth): the same without its last row. The
/// caller decides the shape from the branch condition alpha p < tol.
inline Eigen::MatrixXd build_q(const Eigen::VectorXd& singular_values,
                               const Eigen::VectorXd& projection, double residual_norm,
                               double alpha, bool rank_growth_shape) {
  const Eigen::Index k = singular_values.size();
  if (projection.size() != k)
    throw std::invalid_argument("build_q: projection length does not match rank");
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(rank_growth_shape ? k + 1 : k, k + 1);
  q.topLeftCorner(k, k).diagonal() = singular_values;
  q.col(k).head(k) = alpha * projection;
  if (rank_growth_shape) q(k, k) = alpha * residual_norm;
  return q;
}

/// Orthogonality trigger: |v_end^T M v_1| > min(tol, tol m). The min is
/// redundant whenever m >= 1 but is kept exactly as specified; for a single
/// column the end-vs-first test degenerates to a column against itself, and
/// no reorthogonalization is signalled.
inline bool needs_reorthogonalization(const Eigen::MatrixXd& v, const MassMatrix& mass,
                                      double tol) {
  const Eigen::Index k = v.cols();
  if (k <= 1) return false;
  const double overlap = std::abs(v.col(k - 1).dot(mass.apply(v.col(0))));
  return overlap > std::min(tol, tol * static_cast<double>(v.rows()));
}

/// Truncation II: keep the leading r triplets with singular value above
/// tol_sv, but always at least one. Returns how many were discarded.
inline Eigen::Index truncate_small_singular_values(SvdState& state, double tol_sv) {
  const Eigen::Index k = state.rank();
  Eigen::Index keep = 0;
  while (keep < k && state.singular_values(keep) > tol_sv) ++keep;
  if (keep == 0) keep = 1;  // never empty the state
  if (keep >= k) return 0;
  state.left_vectors = state.left_vectors.leftCols(keep).eval();
  state.singular_values = state.singular_values.head(keep).eval();
  if (state.tracks_right && state.right_vectors.size() > 0)
    state.right_vectors = state.right_vectors.leftCols(keep).eval();
  return k - keep;
}

namespace detail {

/// Shared update body. Both variants process the same raw column and build
/// the identical middle matrix Q (projection and residual norm scaled by
/// alpha = delta^{1/2}); for the one-weight variant this is the exact
/// algebraic factoring of running the body on the scaled column
/// delta^{1/2} c, and it keeps the two variants' branch decisions, Q
/// factorizations, and left updates bitwise identical. The variants differ
/// only in the right-vector block: delta^{-1/2} versus 1.
inline UpdateReport incremental_update(SvdState& state, const Eigen::VectorXd& column,
                                       double alpha, double right_scale,
                                       double recorded_delta, const MassMatrix& mass,
                                       const IncrementalConfig& config) {
  const Eigen::Index m = state.space_dim();
  const Eigen::Index k = state.rank();
  if (column.size() != m)
    throw std::invalid_argument("incremental update: column length does not match state");

  const Eigen::VectorXd weighted_column = mass.apply(column);
  const Eigen::VectorXd projection = state.left_vectors.transpose() * weighted_column;
  const Eigen::VectorXd residual = column - state.left_vectors * projection;
  const double residual_norm = std::sqrt(std::abs(residual.dot(mass.apply(residual))));

  // p == 0 exactly would make the rank-growth direction 0/0; an exactly
  // dependent column is never a new direction, so fold it into the
  // no-growth branch (only reachable with tol = 0).
  const bool dependent = (residual_norm * alpha < config.tol) || (residual_norm == 0.0);
  const bool at_cap = (k >= m);

  const Eigen::MatrixXd q =
      build_q(state.singular_values, projection, residual_norm, alpha, !dependent);
  const SmallSvd qsvd = svd_sign_fixed(q);

  UpdateReport report;
  if (dependent || at_cap) {
    state.left_vectors = state.left_vectors * qsvd.left.topLeftCorner(k, k);
    state.singular_values = qsvd.values.head(k);
    if (state.tracks_right)
      state.right_vectors =
          expand_right_block(state.right_vectors, right_scale) * qsvd.right.leftCols(k);
    report.branch = dependent ? UpdateBranch::TruncationI : UpdateBranch::RankCap;
  } else {
    Eigen::MatrixXd grown(m, k + 1);
    grown.leftCols(k) = state.left_vectors;
    grown.col(k) = residual / residual_norm;
    state.left_vectors = grown * qsvd.left;
    state.singular_values = qsvd.values;
    if (state.tracks_right)
      state.right_vectors = expand_right_block(state.right_vectors, right_scale) * qsvd.right;
    report.branch = UpdateBranch::RankIncrease;
  }
  state.delta_log.push_back(recorded_delta);

  if (needs_reorthogonalization(state.left_vectors, mass, config.tol)) {
    state.left_vectors = modified_gs_weighted(state.left_vectors, mass);
    report.reorthogonalized = true;
  }
  report.truncated_count = truncate_small_singular_values(state, config.tol_sv);
  return report;
}

}  // namespace detail

/// Start a stream from its first (nonzero) snapshot column.
///
/// The two-weight state is the exact core SVD of [c] [delta1], so the single
/// singular value is delta1^{1/2} ||c||_M; the one-weight state is the exact
/// core SVD of [delta1^{1/2} c], which is the same value. The variants differ
/// only in the right vector: delta1^{-1/2} versus 1.
inline SvdState initialize(const Eigen::VectorXd& column, double delta1,
                           const MassMatrix& mass, const IncrementalConfig& config,
                           SvdVariant variant = SvdVariant::TwoWeight) {
  config.validate();
  if (column.size() != mass.dim())
    throw std::invalid_argument("initialize: column length does not match mass matrix");
  if (!(delta1 > 0.0)) throw std::invalid_argument("initialize: time step must be positive");

  const double norm = weighted_norm(column, mass);
  if (norm == 0.0) throw std::runtime_error("cannot initialize from zero data");
  const double root_delta = std::sqrt(delta1);

  SvdState state;
  state.variant = variant;
  state.tracks_right = config.track_right_vectors;
  state.delta_log = {delta1};
  state.left_vectors = column / norm;
  state.singular_values = Eigen::VectorXd::Constant(1, root_delta * norm);
  if (state.tracks_right)
    state.right_vectors = Eigen::MatrixXd::Constant(
        1, 1, variant == SvdVariant::TwoWeight ? 1.0 / root_delta : 1.0);
  return state;
}

/// One step of the two-weight algorithm: fold column c with step delta into
/// the core SVD of U Delta. Branches on alpha p < tol (Truncation I) or a
/// rank already at the space dimension; otherwise admits the new direction.
/// Ends with the conditional corrective Gram-Schmidt pass and Truncation II.
inline UpdateReport update_two_weight(SvdState& state, const Eigen::VectorXd& column,
                                      double delta, const MassMatrix& mass,
                                      const IncrementalConfig& config) {
  if (state.variant != SvdVariant::TwoWeight)
    throw std::invalid_argument("update_two_weight: state variant mismatch");
  if (!(delta > 0.0)) throw std::invalid_argument("update: time step must be positive");
  config.validate();
  return detail::incremental_update(state, column, std::sqrt(delta), 1.0 / std::sqrt(delta),
                                    delta, mass, config);
}

/// One step of the one-weight algorithm: the body run on the scaled column
/// delta^{1/2} c with the step slot and right-vector block both 1,
/// maintaining the core SVD of U Delta^{1/2}. The scaling is folded into
/// the shared body's alpha so both variants factor the identical Q.
inline UpdateReport update_one_weight(SvdState& state, const Eigen::VectorXd& column,
                                      double delta, const MassMatrix& mass,
                                      const IncrementalConfig& config) {
  if (state.variant != SvdVariant::OneWeight)
    throw std::invalid_argument("update_one_weight: state variant mismatch");
  if (!(delta > 0.0)) throw std::invalid_argument("update: time step must be positive");
  config.validate();
  return detail::incremental_update(state, column, std::sqrt(delta), 1.0, delta, mass,
                                    config);
}

/// Dispatch on the state's variant.
inline UpdateReport update(SvdState& state, const Eigen::VectorXd& column, double delta,
                           const MassMatrix& mass, const IncrementalConfig& config) {
  return state.variant == SvdVariant::TwoWeight
             ? update_two_weight(state, column, delta, mass, config)
             : update_one_weight(state, column, delta, mass, config);
}

/// max |V^T M V - I|
inline double left_orthonormality_defect(const SvdState& state, const MassMatrix& mass) {
  const Eigen::Index k = state.rank();
  return (state.left_vectors.transpose() * mass.apply_matrix(state.left_vectors) -
          Eigen::MatrixXd::Identity(k, k))
      .cwiseAbs()
      .maxCoeff();
}

/// max |W^T Delta W - I| (two-weight) or max |W^T W - I| (one-weight).
/// Requires tracked right vectors.
inline double right_orthonormality_defect(const SvdState& state) {
  if (!state.tracks_right)
    throw std::logic_error("right_orthonormality_defect: right vectors not tracked");
  const Eigen::Index k = state.rank();
  Eigen::MatrixXd gram;
  if (state.variant == SvdVariant::TwoWeight)
    gram = state.right_vectors.transpose() * state.deltas().asDiagonal() * state.right_vectors;
  else
    gram = state.right_vectors.transpose() * state.right_vectors;
  return (gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
}

}  // namespace streampod

#endif  // STREAMPOD_INCREMENTAL_SVD_HPP
