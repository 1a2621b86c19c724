/******************************************************************************
 *
 * Copyright (c) 2026, the streampod project developers.
 *
 * SPDX-License-Identifier: Apache-2.0
 *
 *****************************************************************************/

#ifndef STREAMPOD_DATA_IO_HPP
#define STREAMPOD_DATA_IO_HPP

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <nlohmann/json.hpp>

#include "streampod/incremental_svd.hpp"
#include "streampod/mass_matrix.hpp"
#include "streampod/oracle.hpp"
#include "streampod/pod.hpp"
#include "streampod/time_grid.hpp"

namespace streampod {

static_assert(std::endian::native == std::endian::little,
              "binary snapshot files are little-endian; big-endian hosts are unsupported");

namespace detail {

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

inline void set_full_precision(std::ostream& out) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
}

inline bool parse_double(const std::string& token, double& value) {
  std::size_t consumed = 0;
  try {
    value = std::stod(token, &consumed);
  } catch (const std::exception&) {
    return false;
  }
  return consumed == token.size();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  return fields;
}

}  // namespace detail

/// Parse a Matrix Market file (coordinate or array, real, general or
/// symmetric) into a validated mass matrix. Coordinate data comes back in
/// sparse storage, array data dense. Asymmetry up to 1e-12 (relative to the
/// largest entry) is repaired by averaging; anything worse is an error, as
/// is a factorization-failing (not positive definite) matrix.
inline MassMatrix read_mass_matrix(const std::filesystem::path& path) {
  std::ifstream in = detail::open_input(path);
  std::string header;
  if (!std::getline(in, header) || header.rfind("%%MatrixMarket", 0) != 0)
    throw std::runtime_error(path.string() + ": missing MatrixMarket header");
  std::istringstream hs(header);
  std::string tag, object, format, field, symmetry;
  hs >> tag >> object >> format >> field >> symmetry;
  std::transform(format.begin(), format.end(), format.begin(), ::tolower);
  std::transform(field.begin(), field.end(), field.begin(), ::tolower);
  std::transform(symmetry.begin(), symmetry.end(), symmetry.begin(), ::tolower);
  if (object != "matrix" || (format != "coordinate" && format != "array") ||
      field != "real" || (symmetry != "general" && symmetry != "symmetric"))
    throw std::runtime_error(path.string() + ": unsupported MatrixMarket type (need " +
                             "coordinate/array real general/symmetric)");

  std::string line;
  while (std::getline(in, line) && (line.empty() || line[0] == '%')) {
  }
  std::istringstream sizes(line);
  Eigen::Index rows = 0, cols = 0;
  long long nnz = 0;
  if (format == "coordinate") {
    if (!(sizes >> rows >> cols >> nnz))
      throw std::runtime_error(path.string() + ": bad size line");
  } else {
    if (!(sizes >> rows >> cols)) throw std::runtime_error(path.string() + ": bad size line");
  }
  if (rows != cols || rows < 1)
    throw std::runtime_error(path.string() + ": mass matrix must be square");

  const bool symmetric = symmetry == "symmetric";
  if (format == "coordinate") {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(nnz) * (symmetric ? 2 : 1));
    for (long long e = 0; e < nnz; ++e) {
      Eigen::Index i = 0, j = 0;
      double v = 0.0;
      if (!(in >> i >> j >> v))
        throw std::runtime_error(path.string() + ": truncated coordinate data");
      if (i < 1 || i > rows || j < 1 || j > cols)
        throw std::runtime_error(path.string() + ": index out of range");
      triplets.emplace_back(i - 1, j - 1, v);
      if (symmetric && i != j) triplets.emplace_back(j - 1, i - 1, v);
    }
    Eigen::SparseMatrix<double> m(rows, cols);
    m.setFromTriplets(triplets.begin(), triplets.end());
    if (!symmetric) {
      // general coordinate files must still describe a symmetric matrix
      const Eigen::MatrixXd d(m);
      const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
      if ((d - d.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::runtime_error(path.string() + ": matrix is not symmetric");
      const Eigen::MatrixXd sym = 0.5 * (d + d.transpose());
      return MassMatrix(Eigen::SparseMatrix<double>(sym.sparseView()));
    }
    return MassMatrix(std::move(m));
  }

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  if (symmetric) {
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = j; i < rows; ++i) {
        double v = 0.0;
        if (!(in >> v)) throw std::runtime_error(path.string() + ": truncated array data");
        m(i, j) = v;
        m(j, i) = v;
      }
  } else {
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) {
        double v = 0.0;
        if (!(in >> v)) throw std::runtime_error(path.string() + ": truncated array data");
        m(i, j) = v;
      }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw std::runtime_error(path.string() + ": matrix is not symmetric");
    m = 0.5 * (m + m.transpose()).eval();
  }
  return MassMatrix(std::move(m));
}

/// Write a mass matrix as Matrix Market symmetric coordinate data (lower
/// triangle, full precision).
inline void write_mass_matrix(const MassMatrix& mass, const std::filesystem::path& path) {
  std::ofstream out = detail::open_output(path);
  detail::set_full_precision(out);
  const Eigen::MatrixXd m = mass.dense();
  long long nnz = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = j; i < m.rows(); ++i)
      if (m(i, j) != 0.0) ++nnz;
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << m.rows() << ' ' << m.cols() << ' ' << nnz << '\n';
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = j; i < m.rows(); ++i)
      if (m(i, j) != 0.0) out << (i + 1) << ' ' << (j + 1) << ' ' << m(i, j) << '\n';
}

/// Headerless CSV matrix: one row per line.
inline Eigen::MatrixXd read_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in = detail::open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = detail::split_csv_line(line);
    std::vector<double> row;
    row.reserve(fields.size());
    bool numeric = true;
    for (const auto& f : fields) {
      double v = 0.0;
      if (!detail::parse_double(f, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (first) {  // optional header line
        first = false;
        continue;
      }
      throw std::runtime_error(path.string() + ": non-numeric CSV entry");
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error(path.string() + ": ragged CSV rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path.string() + ": empty CSV file");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

inline void write_csv_matrix(const Eigen::MatrixXd& m, const std::filesystem::path& path) {
  std::ofstream out = detail::open_output(path);
  detail::set_full_precision(out);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
}

/// Grid and snapshot columns as read from disk; the mass matrix travels in
/// its own file.
struct SnapshotSet {
  TimeGrid grid;
  Eigen::MatrixXd columns;
};

/// Read snapshots (CSV with optional header, or raw little-endian float64
/// with an "m s" sidecar shape file at <path>.shape) together with the time
/// grid (one point per whitespace-separated token). Column counts must
/// match the grid's step count.
inline SnapshotSet read_snapshots(const std::filesystem::path& snapshots_path,
                                  const std::filesystem::path& times_path) {
  std::vector<double> points;
  {
    std::ifstream in = detail::open_input(times_path);
    double t = 0.0;
    while (in >> t) points.push_back(t);
    if (!in.eof()) throw std::runtime_error(times_path.string() + ": bad time value");
  }
  TimeGrid grid{std::move(points)};  // rejects non-increasing grids

  Eigen::MatrixXd columns;
  if (snapshots_path.extension() == ".bin") {
    const std::filesystem::path shape_path = snapshots_path.string() + ".shape";
    Eigen::Index m = 0, s = 0;
    {
      std::ifstream shape = detail::open_input(shape_path);
      if (!(shape >> m >> s) || m < 1 || s < 1)
        throw std::runtime_error(shape_path.string() + ": expected shape line \"m s\"");
    }
    std::ifstream in(snapshots_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + snapshots_path.string());
    columns.resize(m, s);
    in.read(reinterpret_cast<char*>(columns.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m * s)));
    if (in.gcount() != static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m * s)))
      throw std::runtime_error(snapshots_path.string() + ": shape mismatch (file too short)");
    char extra = 0;
    if (in.read(&extra, 1); in.gcount() != 0)
      throw std::runtime_error(snapshots_path.string() + ": shape mismatch (file too long)");
  } else {
    columns = read_csv_matrix(snapshots_path);
  }
  if (columns.cols() != grid.steps())
    throw std::runtime_error(snapshots_path.string() +
                             ": shape mismatch between snapshots and time grid");
  return SnapshotSet{std::move(grid), std::move(columns)};
}

/// Column-major raw float64 plus the sidecar shape file.
inline void write_snapshots_binary(const Eigen::MatrixXd& columns,
                                   const std::filesystem::path& path) {
  {
    std::ofstream out = detail::open_output(path, /*binary=*/true);
    out.write(reinterpret_cast<const char*>(columns.data()),
              static_cast<std::streamsize>(sizeof(double) *
                                           static_cast<std::size_t>(columns.size())));
  }
  std::ofstream shape = detail::open_output(std::filesystem::path(path.string() + ".shape"));
  shape << columns.rows() << ' ' << columns.cols() << '\n';
}

/// Assemble the full dataset from its three files.
inline SnapshotData read_dataset(const std::filesystem::path& mass_path,
                                 const std::filesystem::path& snapshots_path,
                                 const std::filesystem::path& times_path) {
  MassMatrix mass = read_mass_matrix(mass_path);
  SnapshotSet set = read_snapshots(snapshots_path, times_path);
  return SnapshotData(std::move(mass), std::move(set.grid), std::move(set.columns));
}

/// Write mass.mtx, snapshots.csv and times.txt under dir.
inline void write_dataset(const SnapshotData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_mass_matrix(data.mass, dir / "mass.mtx");
  write_csv_matrix(data.coefficients, dir / "snapshots.csv");
  std::ofstream times = detail::open_output(dir / "times.txt");
  detail::set_full_precision(times);
  for (double t : data.grid.points()) times << t << '\n';
}

/// Emit the results of an incremental run under out_dir:
///   singular_values.csv  index, sigma, sigma^2, cumulative energy fraction
///   modes.csv            m x k mode coefficients
///   temporal.csv         s x k temporal coefficients (PlainChi), if tracked
///   summary.json         k, m, s, tolerances, branch counts, defects
inline void write_results(const PodBasis& basis,
                          const std::optional<TemporalCoefficients>& temporal,
                          const SvdState& state, const BranchCounts& branches,
                          const IncrementalConfig& config,
                          const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  {
    std::ofstream out = detail::open_output(out_dir / "singular_values.csv");
    detail::set_full_precision(out);
    out << "index,sigma,sigma_squared,energy_fraction\n";
    const double total = basis.singular_values.squaredNorm();
    double running = 0.0;
    for (Eigen::Index i = 0; i < basis.rank(); ++i) {
      const double sv = basis.singular_values(i);
      running += sv * sv;
      out << (i + 1) << ',' << sv << ',' << sv * sv << ','
          << (total > 0.0 ? running / total : 0.0) << '\n';
    }
  }

  write_csv_matrix(basis.modes, out_dir / "modes.csv");
  if (temporal) write_csv_matrix(temporal->plain_chi_coeffs(), out_dir / "temporal.csv");

  nlohmann::json summary;
  summary["k"] = state.rank();
  summary["m"] = state.space_dim();
  summary["s"] = state.columns_seen();
  summary["tol"] = config.tol;
  summary["tol_sv"] = config.tol_sv;
  summary["variant"] = state.variant == SvdVariant::TwoWeight ? "two-weight" : "one-weight";
  summary["branches"] = {{"rank_increase", branches.rank_increase},
                         {"truncation_i", branches.truncation_i},
                         {"rank_cap", branches.rank_cap}};
  summary["orth_defect_V"] = left_orthonormality_defect(state, basis.mass);
  if (state.tracks_right)
    summary["orth_defect_W"] = right_orthonormality_defect(state);
  else
    summary["orth_defect_W"] = nullptr;
  summary["right_vectors_tracked"] = state.tracks_right;

  std::ofstream out = detail::open_output(out_dir / "summary.json");
  out << summary.dump(2) << '\n';
}

/// Same layout for a batch core SVD, with the verification report in place
/// of streaming diagnostics.
inline void write_oracle_results(const CoreSvd& core, const MassMatrix& mass,
                                 const TimeGrid& grid, const VerifyReport& report,
                                 const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream out = detail::open_output(out_dir / "singular_values.csv");
    detail::set_full_precision(out);
    out << "index,sigma,sigma_squared,energy_fraction\n";
    const double total = core.singular_values.squaredNorm();
    double running = 0.0;
    for (Eigen::Index i = 0; i < core.rank(); ++i) {
      const double sv = core.singular_values(i);
      running += sv * sv;
      out << (i + 1) << ',' << sv << ',' << sv * sv << ','
          << (total > 0.0 ? running / total : 0.0) << '\n';
    }
  }
  write_csv_matrix(core.left_vectors, out_dir / "modes.csv");
  Eigen::MatrixXd plain = core.right_vectors;
  if (core.right_weight == RightWeight::Identity)
    plain = grid.deltas().cwiseSqrt().cwiseInverse().asDiagonal() * plain;
  write_csv_matrix(plain, out_dir / "temporal.csv");

  nlohmann::json summary;
  summary["k"] = core.rank();
  summary["m"] = mass.dim();
  summary["s"] = grid.steps();
  summary["source"] = "oracle";
  summary["verify"] = {{"forward_residual", report.forward_residual},
                       {"adjoint_residual", report.adjoint_residual},
                       {"orth_defect_V", report.left_defect},
                       {"orth_defect_W", report.right_defect},
                       {"ordering_defect", report.ordering_defect},
                       {"tol_check", report.tol_check},
                       {"passed", report.passed}};
  std::ofstream out = detail::open_output(out_dir / "summary.json");
  out << summary.dump(2) << '\n';
}

struct HeatGenConfig {
  Eigen::Index elements = 32;   // n: 1D linear elements on (0,1); m = n-1 unknowns
  Eigen::Index steps = 64;      // s: time intervals
  double final_time = 1.0;      // T
  double diffusivity = 0.1;
  std::uint64_t seed = 0;
  double stretch = 1.0;         // geometric step ratio; 1 = uniform grid
};

/// Synthetic dataset matching the library's data model: 1D linear-element
/// mass matrix (h/6 [1 4 1] stencil on interior nodes, Dirichlet ends),
/// backward-Euler heat-equation snapshots from a seeded random smooth
/// initial condition. Deterministic per seed.
inline SnapshotData generate_heat_fem_data(const HeatGenConfig& config) {
  if (config.elements < 2) throw std::invalid_argument("heat generator: need n >= 2");
  if (config.steps < 1) throw std::invalid_argument("heat generator: need steps >= 1");
  if (!(config.final_time > 0.0))
    throw std::invalid_argument("heat generator: final time must be positive");
  if (config.diffusivity < 0.0)
    throw std::invalid_argument("heat generator: diffusivity must be nonnegative");
  if (!(config.stretch > 0.0))
    throw std::invalid_argument("heat generator: stretch must be positive");

  const Eigen::Index n = config.elements;
  const Eigen::Index m = n - 1;
  const Eigen::Index s = config.steps;
  const double h = 1.0 / static_cast<double>(n);

  std::vector<Eigen::Triplet<double>> mass_entries, stiff_entries;
  for (Eigen::Index i = 0; i < m; ++i) {
    mass_entries.emplace_back(i, i, 4.0 * h / 6.0);
    stiff_entries.emplace_back(i, i, 2.0 / h);
    if (i + 1 < m) {
      mass_entries.emplace_back(i, i + 1, h / 6.0);
      mass_entries.emplace_back(i + 1, i, h / 6.0);
      stiff_entries.emplace_back(i, i + 1, -1.0 / h);
      stiff_entries.emplace_back(i + 1, i, -1.0 / h);
    }
  }
  Eigen::SparseMatrix<double> mass_mat(m, m), stiffness(m, m);
  mass_mat.setFromTriplets(mass_entries.begin(), mass_entries.end());
  stiffness.setFromTriplets(stiff_entries.begin(), stiff_entries.end());

  // time grid: uniform, or geometric with ratio stretch
  std::vector<double> deltas(static_cast<std::size_t>(s));
  if (config.stretch == 1.0) {
    for (auto& d : deltas) d = config.final_time / static_cast<double>(s);
  } else {
    const double ratio = config.stretch;
    const double first =
        config.final_time * (1.0 - ratio) / (1.0 - std::pow(ratio, static_cast<double>(s)));
    double d = first;
    for (auto& out : deltas) {
      out = d;
      d *= ratio;
    }
  }
  TimeGrid grid = TimeGrid::from_deltas(0.0, deltas);

  // smooth random initial condition: sine modes with decaying amplitudes,
  // rich enough that the snapshot spectrum is not artificially rank-capped
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  const int modes = static_cast<int>(std::min<Eigen::Index>(m, 12));
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
  for (int q = 1; q <= modes; ++q) {
    const double qd = static_cast<double>(q);
    const double a = amp(rng) / (qd * qd * qd);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double x = static_cast<double>(i + 1) * h;
      u(i) += a * std::sin(static_cast<double>(q) * std::numbers::pi * x);
    }
  }

  Eigen::MatrixXd snapshots(m, s);
  snapshots.col(0) = u;
  for (Eigen::Index j = 1; j < s; ++j) {
    const Eigen::SparseMatrix<double> system =
        mass_mat + (grid.delta(j) * config.diffusivity) * stiffness;
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> solver(system);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("heat generator: implicit step factorization failed");
    snapshots.col(j) = solver.solve(Eigen::VectorXd(mass_mat * snapshots.col(j - 1)));
  }

  return SnapshotData(MassMatrix(std::move(mass_mat)), std::move(grid), std::move(snapshots));
}

}  // namespace streampod

#endif  // STREAMPOD_DATA_IO_HPP
