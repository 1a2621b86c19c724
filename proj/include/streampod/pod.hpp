/******************************************************************************
 *
 * Copyright (c) 2026, the streampod project developers.
 *
 * SPDX-License-Identifier: Apache-2.0
 *
 *****************************************************************************/

#ifndef STREAMPOD_POD_HPP
#define STREAMPOD_POD_HPP

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "streampod/incremental_svd.hpp"
#include "streampod/mass_matrix.hpp"
#include "streampod/time_grid.hpp"
#include "streampod/weighted.hpp"

namespace streampod {

/// One snapshot: a coefficient column and the length of its time interval.
struct SnapshotRecord {
  Eigen::VectorXd column;
  double delta = 0.0;
};

/// Piecewise-constant-in-time data: coefficient columns u_j against the
/// spatial basis whose Gram matrix is mass, column j living on the j-th
/// interval of grid.
struct SnapshotData {
  SnapshotData(MassMatrix mass_in, TimeGrid grid_in, Eigen::MatrixXd coefficients_in)
      : mass(std::move(mass_in)), grid(std::move(grid_in)),
        coefficients(std::move(coefficients_in)) {
    if (coefficients.rows() != mass.dim())
      throw std::invalid_argument("snapshot data: row count does not match mass matrix");
    if (coefficients.cols() != grid.steps())
      throw std::invalid_argument("snapshot data: column count does not match grid steps");
  }

  MassMatrix mass;
  TimeGrid grid;
  Eigen::MatrixXd coefficients;

  Eigen::Index space_dim() const { return coefficients.rows(); }
  Eigen::Index count() const { return coefficients.cols(); }
  SnapshotRecord record(Eigen::Index j) const {
    return SnapshotRecord{coefficients.col(j), grid.delta(j)};
  }
};

/// POD singular values and modes. Column i of modes holds the coefficients
/// of the i-th mode against the spatial basis; columns are M-orthonormal.
struct PodBasis {
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd modes;
  MassMatrix mass;

  Eigen::Index rank() const { return singular_values.size(); }
};

/// How temporal coefficient columns encode the functions f_i.
///
/// PlainChi: f_i(t) = sum_l w_{i,l} chi_l(t) on the plain characteristic
/// functions (two-weight right vectors; Delta-orthonormal columns).
/// WeightedChi: f_i(t) = sum_l w_{i,l} delta_l^{-1/2} chi_l(t) on the
/// normalized characteristics (one-weight right vectors; plainly
/// orthonormal columns). Both conventions describe the same functions.
enum class TemporalConvention { PlainChi, WeightedChi };

struct TemporalCoefficients {
  TimeGrid grid;
  Eigen::MatrixXd coeffs;  // steps x rank
  TemporalConvention convention = TemporalConvention::PlainChi;

  Eigen::Index rank() const { return coeffs.cols(); }

  /// f_i(t); undefined at breakpoints and outside the grid.
  double value(Eigen::Index mode, double t) const {
    const Eigen::Index j = grid.interval_index(t);
    const double raw = coeffs(j, mode);
    return convention == TemporalConvention::PlainChi ? raw
                                                      : raw / std::sqrt(grid.delta(j));
  }

  /// Coefficients rewritten in the PlainChi convention (row l scaled by
  /// delta_l^{-1/2} when coming from WeightedChi).
  Eigen::MatrixXd plain_chi_coeffs() const {
    if (convention == TemporalConvention::PlainChi) return coeffs;
    return grid.deltas().cwiseSqrt().cwiseInverse().asDiagonal() * coeffs;
  }
};

/// POD singular values and modes are exactly the state's singular values and
/// left vectors; this transfer also checks the basis still carries its
/// M-orthonormality (defect above 1e-6 means the state was corrupted).
inline PodBasis modes_from_svd(const SvdState& state, const MassMatrix& mass) {
  if (state.space_dim() != mass.dim())
    throw std::invalid_argument("modes_from_svd: dimension mismatch");
  const double defect = left_orthonormality_defect(state, mass);
  if (defect > 1e-6)
    throw std::runtime_error("modes_from_svd: left vectors lost M-orthonormality");
  return PodBasis{state.singular_values, state.left_vectors, mass};
}

/// Temporal functions of the decomposition, one column per mode, in the
/// convention matching the state's variant. The grid is rebuilt from the
/// step log starting at t_begin.
inline TemporalCoefficients temporal_functions(const SvdState& state, double t_begin = 0.0) {
  if (!state.tracks_right) throw std::runtime_error("right vectors not tracked");
  return TemporalCoefficients{
      TimeGrid::from_deltas(t_begin, state.delta_log), state.right_vectors,
      state.variant == SvdVariant::TwoWeight ? TemporalConvention::PlainChi
                                             : TemporalConvention::WeightedChi};
}

/// Rank-r optimal reconstruction at time t: sum_{i<=r} sigma_i f_i(t) x_i,
/// returned as a coefficient vector against the spatial basis.
inline Eigen::VectorXd reconstruct(const PodBasis& basis, const TemporalCoefficients& temporal,
                                   double t, Eigen::Index r) {
  if (r < 1 || r > basis.rank() || r > temporal.rank())
    throw std::invalid_argument("reconstruct: rank out of range");
  const Eigen::Index j = temporal.grid.interval_index(t);  // throws at breakpoints
  Eigen::VectorXd f(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    const double raw = temporal.coeffs(j, i);
    f(i) = temporal.convention == TemporalConvention::PlainChi
               ? raw
               : raw / std::sqrt(temporal.grid.delta(j));
  }
  return basis.modes.leftCols(r) * basis.singular_values.head(r).cwiseProduct(f);
}

/// Minimal achievable squared data-approximation error at rank r:
/// sum of the squared singular values past r.
inline double pod_error_tail(const Eigen::VectorXd& singular_values, Eigen::Index r) {
  if (r < 0) throw std::invalid_argument("pod_error_tail: negative rank");
  double tail = 0.0;
  for (Eigen::Index i = r; i < singular_values.size(); ++i)
    tail += singular_values(i) * singular_values(i);
  return tail;
}

/// The data-approximation error integral, evaluated exactly for piecewise
/// constant data: sum_j delta_j |u_j - P_r u_j|_M^2 with P_r the M-orthogonal
/// projection onto the leading r modes. Agrees with pod_error_tail when the
/// basis came from this data without truncation.
inline double pod_error_direct(const SnapshotData& data, const PodBasis& basis,
                               Eigen::Index r) {
  if (r < 0 || r > basis.rank()) throw std::invalid_argument("pod_error_direct: rank out of range");
  if (basis.modes.rows() != data.space_dim())
    throw std::invalid_argument("pod_error_direct: dimension mismatch");
  const auto leading = basis.modes.leftCols(r);
  double total = 0.0;
  for (Eigen::Index j = 0; j < data.count(); ++j) {
    const Eigen::VectorXd& u = data.coefficients.col(j);
    const Eigen::VectorXd err = u - leading * (leading.transpose() * data.mass.apply(u));
    total += data.grid.delta(j) * std::abs(err.dot(data.mass.apply(err)));
  }
  return total;
}

/// The Riemann-sum reduction of the POD integral operator: U Delta^{1/2},
/// whose one-weight SVD solves the discrete POD problem. This is the same
/// matrix the exact piecewise-constant pathway factors, shared code and all.
inline Eigen::MatrixXd riemann_reduction(const SnapshotData& data) {
  return scale_columns_sqrt_delta(data.coefficients, data.grid);
}

}  // namespace streampod

#endif  // STREAMPOD_POD_HPP
