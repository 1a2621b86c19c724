/******************************************************************************
 *
 * Copyright (c) 2026, the streampod project developers.
 *
 * SPDX-License-Identifier: Apache-2.0
 *
 *****************************************************************************/

#ifndef STREAMPOD_TIME_GRID_HPP
#define STREAMPOD_TIME_GRID_HPP

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace streampod {

/// Strictly increasing time points t_1 < ... < t_{s+1}. Induces the diagonal
/// step matrix diag(delta_1..delta_s) with delta_j = t_{j+1} - t_j > 0.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2)
      throw std::invalid_argument("time grid needs at least two points");
    for (std::size_t j = 0; j + 1 < points_.size(); ++j)
      if (!(points_[j] < points_[j + 1]))
        throw std::invalid_argument("time grid must be strictly increasing");
  }

  static TimeGrid uniform(double t_begin, double t_end, Eigen::Index steps) {
    if (steps < 1) throw std::invalid_argument("time grid needs at least one step");
    std::vector<double> pts(static_cast<std::size_t>(steps) + 1);
    for (Eigen::Index j = 0; j <= steps; ++j)
      pts[static_cast<std::size_t>(j)] =
          t_begin + (t_end - t_begin) * static_cast<double>(j) / static_cast<double>(steps);
    pts.back() = t_end;
    return TimeGrid(std::move(pts));
  }

  /// 0, 1, ..., steps — every step has length one.
  static TimeGrid unit_steps(Eigen::Index steps) {
    return uniform(0.0, static_cast<double>(steps), steps);
  }

  static TimeGrid from_deltas(double t_begin, const std::vector<double>& deltas) {
    std::vector<double> pts;
    pts.reserve(deltas.size() + 1);
    pts.push_back(t_begin);
    for (double d : deltas) pts.push_back(pts.back() + d);
    return TimeGrid(std::move(pts));
  }

  Eigen::Index steps() const { return static_cast<Eigen::Index>(points_.size()) - 1; }
  double point(Eigen::Index j) const { return points_.at(static_cast<std::size_t>(j)); }
  double delta(Eigen::Index j) const {
    return points_.at(static_cast<std::size_t>(j) + 1) - points_.at(static_cast<std::size_t>(j));
  }
  double start() const { return points_.front(); }
  double end() const { return points_.back(); }

  Eigen::VectorXd deltas() const {
    Eigen::VectorXd d(steps());
    for (Eigen::Index j = 0; j < steps(); ++j) d(j) = delta(j);
    return d;
  }

  const std::vector<double>& points() const { return points_; }

  /// Index j of the open interval (t_j, t_{j+1}) containing t. Piecewise
  /// constant data has no value at the breakpoints themselves, so hitting a
  /// grid point exactly, or leaving (t_1, t_{s+1}), is an error.
  Eigen::Index interval_index(double t) const {
    if (t < points_.front() || t > points_.back())
      throw std::domain_error("time outside the data interval");
    for (std::size_t j = 0; j < points_.size(); ++j)
      if (t == points_[j]) throw std::domain_error("undefined at breakpoints");
    std::size_t lo = 0, hi = points_.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (points_[mid] < t ? lo : hi) = mid;
    }
    return static_cast<Eigen::Index>(lo);
  }

 private:
  std::vector<double> points_;
};

}  // namespace streampod

#endif  // STREAMPOD_TIME_GRID_HPP
