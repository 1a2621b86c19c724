/******************************************************************************
 *
 * Copyright (c) 2026, the streampod project developers.
 *
 * SPDX-License-Identifier: Apache-2.0
 *
 *****************************************************************************/

#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "streampod/streampod.hpp"
#include "test_support.hpp"

using namespace streampod;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

const IncrementalConfig kDefault{};

}  // namespace

TEST_CASE("initialize builds the exact rank-one core SVD", "[incremental]") {
  SECTION("unit first step") {
    const SvdState state = initialize(vec2(3, 4), 1.0, MassMatrix::identity(2), kDefault);
    CHECK_THAT(state.singular_values(0), WithinAbs(5.0, 1e-15));
    CHECK_THAT(state.left_vectors(0, 0), WithinAbs(0.6, 1e-15));
    CHECK_THAT(state.left_vectors(1, 0), WithinAbs(0.8, 1e-15));
    CHECK_THAT(state.right_vectors(0, 0), WithinAbs(1.0, 1e-15));
    CHECK(state.rank() == 1);
    CHECK(state.columns_seen() == 1);
  }
  SECTION("longer first step scales the value and the right vector") {
    // exact core SVD of [c][delta]: sigma = delta^{1/2} |c|_M, W = delta^{-1/2}
    const SvdState state = initialize(vec2(3, 4), 4.0, MassMatrix::identity(2), kDefault);
    CHECK_THAT(state.singular_values(0), WithinAbs(10.0, 1e-14));
    CHECK_THAT(state.left_vectors(0, 0), WithinAbs(0.6, 1e-15));
    CHECK_THAT(state.left_vectors(1, 0), WithinAbs(0.8, 1e-15));
    CHECK_THAT(state.right_vectors(0, 0), WithinAbs(0.5, 1e-15));
  }
  SECTION("weighted norm") {
    Eigen::MatrixXd d = Eigen::Vector2d(1, 4).asDiagonal();
    const SvdState state = initialize(vec2(3, 2), 1.0, MassMatrix{d}, kDefault);
    CHECK_THAT(state.singular_values(0), WithinAbs(5.0, 1e-15));
    CHECK_THAT(state.left_vectors(0, 0), WithinAbs(0.6, 1e-15));
    CHECK_THAT(state.left_vectors(1, 0), WithinAbs(0.4, 1e-15));
  }
  SECTION("one-weight variant carries the scaled column and a plain right vector") {
    const SvdState state = initialize(vec2(3, 4), 4.0, MassMatrix::identity(2), kDefault,
                                      SvdVariant::OneWeight);
    CHECK_THAT(state.singular_values(0), WithinAbs(10.0, 1e-14));
    CHECK_THAT(state.right_vectors(0, 0), WithinAbs(1.0, 1e-15));
    CHECK_THAT(state.left_vectors(0, 0), WithinAbs(0.6, 1e-15));
  }
  SECTION("zero data is rejected") {
    CHECK_THROWS_WITH(initialize(Eigen::VectorXd::Zero(2), 1.0, MassMatrix::identity(2),
                                 kDefault),
                      ContainsSubstring("cannot initialize from zero data"));
  }
  SECTION("nonpositive step is rejected") {
    CHECK_THROWS_AS(initialize(vec2(1, 0), 0.0, MassMatrix::identity(2), kDefault),
                    std::invalid_argument);
  }
}

TEST_CASE("build_q assembles both shapes", "[incremental]") {
  SECTION("full shape") {
    const Eigen::MatrixXd q = build_q(Eigen::VectorXd::Constant(1, 2.0),
                                      Eigen::VectorXd::Constant(1, 0.5), 0.3, 1.0, true);
    REQUIRE(q.rows() == 2);
    REQUIRE(q.cols() == 2);
    CHECK(q(0, 0) == 2.0);
    CHECK(q(0, 1) == 0.5);
    CHECK(q(1, 0) == 0.0);
    CHECK(q(1, 1) == 0.3);
  }
  SECTION("truncated shape drops the last row") {
    const Eigen::MatrixXd q = build_q(Eigen::VectorXd::Constant(1, 2.0),
                                      Eigen::VectorXd::Constant(1, 0.5), 0.3, 1.0, false);
    REQUIRE(q.rows() == 1);
    REQUIRE(q.cols() == 2);
    CHECK(q(0, 0) == 2.0);
    CHECK(q(0, 1) == 0.5);
  }
  SECTION("diagonal augmentation") {
    Eigen::VectorXd s(2);
    s << 3, 1;
    const Eigen::MatrixXd q = build_q(s, Eigen::VectorXd::Zero(2), 2.0, 1.0, true);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 3);
    expected(0, 0) = 3.0;
    expected(1, 1) = 1.0;
    expected(2, 2) = 2.0;
    CHECK((q - expected).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("update admits an orthogonal column and sorts descending", "[incremental]") {
  const MassMatrix mass = MassMatrix::identity(2);
  IncrementalConfig config;
  config.tol = 1e-12;
  SvdState state = initialize(vec2(1, 0), 1.0, mass, config);
  const UpdateReport report = update_two_weight(state, vec2(0, 2), 1.0, mass, config);
  CHECK(report.branch == UpdateBranch::RankIncrease);
  REQUIRE(state.rank() == 2);
  CHECK_THAT(state.singular_values(0), WithinAbs(2.0, 1e-14));
  CHECK_THAT(state.singular_values(1), WithinAbs(1.0, 1e-14));
  CHECK_THAT(state.left_vectors(0, 0), WithinAbs(0.0, 1e-14));
  CHECK_THAT(state.left_vectors(1, 0), WithinAbs(1.0, 1e-14));
  CHECK_THAT(state.left_vectors(0, 1), WithinAbs(1.0, 1e-14));
  CHECK_THAT(state.left_vectors(1, 1), WithinAbs(0.0, 1e-14));
}

TEST_CASE("update takes Truncation I on a parallel column", "[incremental]") {
  const MassMatrix mass = MassMatrix::identity(2);
  IncrementalConfig config;
  config.tol = 1e-6;
  SvdState state = initialize(vec2(1, 0), 1.0, mass, config);
  const UpdateReport report = update_two_weight(state, vec2(2, 0), 1.0, mass, config);
  CHECK(report.branch == UpdateBranch::TruncationI);
  REQUIRE(state.rank() == 1);

  // independent reference: the batch oracle on [[1, 2], [0, 0]]
  Eigen::MatrixXd u(2, 2);
  u << 1, 2, 0, 0;
  const CoreSvd oracle = batch_core_svd_two_weight(u, mass, TimeGrid::unit_steps(2));
  REQUIRE(oracle.rank() == 1);
  CHECK_THAT(state.singular_values(0), WithinAbs(oracle.singular_values(0), 1e-12));
  CHECK_THAT(state.singular_values(0), WithinAbs(std::sqrt(5.0), 1e-12));
}

TEST_CASE("update rejects wrong variants and shapes", "[incremental]") {
  const MassMatrix mass = MassMatrix::identity(2);
  SvdState one = initialize(vec2(1, 0), 1.0, mass, kDefault, SvdVariant::OneWeight);
  CHECK_THROWS_WITH(update_two_weight(one, vec2(0, 1), 1.0, mass, kDefault),
                    ContainsSubstring("variant mismatch"));
  SvdState two = initialize(vec2(1, 0), 1.0, mass, kDefault);
  CHECK_THROWS_WITH(update_one_weight(two, vec2(0, 1), 1.0, mass, kDefault),
                    ContainsSubstring("variant mismatch"));
  Eigen::VectorXd wrong(3);
  wrong << 1, 2, 3;
  CHECK_THROWS_AS(update_two_weight(two, wrong, 1.0, mass, kDefault), std::invalid_argument);
}

TEST_CASE("incremental singular values match the batch oracle", "[incremental]") {
  std::mt19937 gen(60);
  const Eigen::Index m = 5, s = 8;
  const MassMatrix mass = test_support::random_mass(gen, m);
  const TimeGrid grid = test_support::random_grid(gen, s, 0.1, 1.0);
  const Eigen::MatrixXd u = test_support::random_matrix(gen, m, s);

  IncrementalConfig config;
  config.tol = 0.0;  // exact-update path
  SvdState state = initialize(u.col(0), grid.delta(0), mass, config);
  for (Eigen::Index j = 1; j < s; ++j)
    update_two_weight(state, u.col(j), grid.delta(j), mass, config);

  const CoreSvd oracle = batch_core_svd_two_weight(u, mass, grid);
  REQUIRE(state.rank() == oracle.rank());
  for (Eigen::Index i = 0; i < state.rank(); ++i)
    CHECK(std::abs(state.singular_values(i) - oracle.singular_values(i)) <=
          1e-10 * oracle.singular_values(i));
}

TEST_CASE("one-weight variant on a simple two-step stream", "[incremental]") {
  const MassMatrix mass = MassMatrix::identity(2);
  IncrementalConfig config;
  config.tol = 1e-12;
  SvdState state = initialize(vec2(1, 0), 2.0, mass, config, SvdVariant::OneWeight);
  update_one_weight(state, vec2(0, 1), 3.0, mass, config);
  REQUIRE(state.rank() == 2);
  // oracle values: the SVD of U Delta^{1/2} = diag(sqrt(2), sqrt(3)) sorted
  CHECK_THAT(state.singular_values(0), WithinAbs(std::sqrt(3.0), 1e-14));
  CHECK_THAT(state.singular_values(1), WithinAbs(std::sqrt(2.0), 1e-14));
}

TEST_CASE("the two variants stay equivalent along a random stream", "[incremental]") {
  std::mt19937 gen(61);
  const Eigen::Index m = 6, s = 12;
  const MassMatrix mass = test_support::random_mass(gen, m);
  const TimeGrid grid = test_support::random_grid(gen, s);
  const Eigen::MatrixXd u = test_support::random_matrix(gen, m, s);

  for (const double tol_sv : {0.0, 1e-4}) {
    IncrementalConfig config;
    config.tol = 1e-12;
    config.tol_sv = tol_sv;
    SvdState two = initialize(u.col(0), grid.delta(0), mass, config);
    SvdState one = initialize(u.col(0), grid.delta(0), mass, config, SvdVariant::OneWeight);
    for (Eigen::Index j = 1; j < s; ++j) {
      update_two_weight(two, u.col(j), grid.delta(j), mass, config);
      update_one_weight(one, u.col(j), grid.delta(j), mass, config);
      REQUIRE(one.rank() == two.rank());
      CHECK((one.singular_values - two.singular_values).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((one.left_vectors - two.left_vectors).cwiseAbs().maxCoeff() <= 1e-12);
      const Eigen::MatrixXd lifted =
          two.deltas().cwiseSqrt().asDiagonal() * two.right_vectors;
      CHECK((one.right_vectors - lifted).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("needs_reorthogonalization follows the quoted trigger", "[incremental]") {
  const MassMatrix mass = MassMatrix::identity(3);
  SECTION("orthonormal columns do not trigger") {
    CHECK_FALSE(needs_reorthogonalization(Eigen::MatrixXd::Identity(3, 2), mass, 1e-10));
  }
  SECTION("a repeated unit column triggers") {
    Eigen::MatrixXd v(3, 2);
    v.col(0) = Eigen::Vector3d::UnitX();
    v.col(1) = Eigen::Vector3d::UnitX();
    CHECK(needs_reorthogonalization(v, mass, 1e-10));
  }
  SECTION("the comparison is strict at the boundary") {
    const double tol = 1e-10;
    Eigen::MatrixXd v(3, 2);
    v.col(0) = Eigen::Vector3d::UnitX();
    v.col(1) = Eigen::Vector3d::UnitY() + tol * Eigen::Vector3d::UnitX();
    // overlap is exactly min(tol, tol*m) = tol, and the trigger needs >
    CHECK_FALSE(needs_reorthogonalization(v, mass, tol));
  }
  SECTION("single column never triggers") {
    Eigen::MatrixXd v(3, 1);
    v.col(0) = Eigen::Vector3d::UnitX();
    CHECK_FALSE(needs_reorthogonalization(v, mass, 1e-10));
  }
}

TEST_CASE("truncate_small_singular_values keeps the floor", "[incremental]") {
  const auto make_state = [](const Eigen::VectorXd& values) {
    SvdState state;
    state.singular_values = values;
    state.left_vectors = Eigen::MatrixXd::Identity(4, values.size());
    state.right_vectors = Eigen::MatrixXd::Identity(5, values.size());
    state.delta_log.assign(5, 1.0);
    return state;
  };

  SECTION("keeps values above the threshold") {
    Eigen::VectorXd s(3);
    s << 5, 1, 1e-14;
    SvdState state = make_state(s);
    CHECK(truncate_small_singular_values(state, 1e-12) == 1);
    CHECK(state.rank() == 2);
    CHECK(state.left_vectors.cols() == 2);
    CHECK(state.right_vectors.cols() == 2);
  }
  SECTION("zero threshold keeps everything") {
    Eigen::VectorXd s(2);
    s << 5, 1;
    SvdState state = make_state(s);
    CHECK(truncate_small_singular_values(state, 0.0) == 0);
    CHECK(state.rank() == 2);
  }
  SECTION("never empties the state") {
    SvdState state = make_state(Eigen::VectorXd::Constant(1, 1e-15));
    CHECK(truncate_small_singular_values(state, 1e-12) == 0);
    CHECK(state.rank() == 1);
  }
}

TEST_CASE("branch bookkeeping along a constructed stream", "[incremental]") {
  Eigen::MatrixXd diag = Eigen::Vector4d(1, 2, 3, 4).asDiagonal();
  const MassMatrix mass{diag};
  IncrementalConfig config;
  config.tol = 1e-6;

  SvdState state = initialize(Eigen::Vector4d(1, 0, 0, 0), 1.0, mass, config);
  BranchCounts counts;

  counts.add(update_two_weight(state, Eigen::Vector4d(0, 2, 0, 0), 1.0, mass, config).branch);
  CHECK(state.rank() == 2);  // M-orthogonal column admitted
  counts.add(update_two_weight(state, Eigen::Vector4d(0, 2, 0, 0), 1.0, mass, config).branch);
  CHECK(state.rank() == 2);  // duplicated column discarded
  counts.add(update_two_weight(state, Eigen::Vector4d(0, 0, 3, 0), 1.0, mass, config).branch);
  CHECK(state.rank() == 3);
  counts.add(update_two_weight(state, Eigen::Vector4d(1, 2, 0, 0), 1.0, mass, config).branch);
  CHECK(state.rank() == 3);  // in-span combination discarded

  CHECK(counts.rank_increase == 2);
  CHECK(counts.truncation_i == 2);
  CHECK(counts.rank_cap == 0);
}

TEST_CASE("rank cap reuses the no-growth branch", "[incremental]") {
  const MassMatrix mass = MassMatrix::identity(2);
  IncrementalConfig config;
  config.tol = 0.0;  // forced growth until the cap
  std::mt19937 gen(62);
  SvdState state = initialize(test_support::random_vector(gen, 2), 0.7, mass, config);
  update_two_weight(state, test_support::random_vector(gen, 2), 0.4, mass, config);
  REQUIRE(state.rank() == 2);
  const UpdateReport report =
      update_two_weight(state, test_support::random_vector(gen, 2), 0.9, mass, config);
  CHECK(report.branch == UpdateBranch::RankCap);
  CHECK(state.rank() == 2);
}

TEST_CASE("exact updates reproduce the weighted data matrix", "[incremental]") {
  std::mt19937 gen(63);
  const Eigen::Index m = 10, s = 6;
  const MassMatrix mass = test_support::random_mass(gen, m);
  const TimeGrid grid = test_support::random_grid(gen, s);
  const Eigen::MatrixXd u = test_support::random_matrix(gen, m, s);

  IncrementalConfig config;
  config.tol = 0.0;
  config.tol_sv = 0.0;
  SvdState state = initialize(u.col(0), grid.delta(0), mass, config);
  for (Eigen::Index j = 1; j < s; ++j) {
    update_two_weight(state, u.col(j), grid.delta(j), mass, config);
    const Eigen::MatrixXd target =
        u.leftCols(j + 1) * grid.deltas().head(j + 1).asDiagonal();
    CHECK((test_support::two_weight_reconstruction(state) - target).norm() <=
          1e-10 * target.norm());
  }
}

TEST_CASE("orthonormality invariants hold after every update", "[incremental]") {
  std::mt19937 gen(64);
  const Eigen::Index m = 8, s = 20;
  const MassMatrix mass = test_support::random_mass(gen, m);
  const TimeGrid grid = test_support::random_grid(gen, s);
  const Eigen::MatrixXd u = test_support::random_matrix(gen, m, s);

  IncrementalConfig config;  // tol = 1e-10, reorthogonalization on
  SvdState state = initialize(u.col(0), grid.delta(0), mass, config);
  double top = state.singular_values(0);
  for (Eigen::Index j = 1; j < s; ++j) {
    update_two_weight(state, u.col(j), grid.delta(j), mass, config);
    CHECK(left_orthonormality_defect(state, mass) <= 1e-10);
    CHECK(right_orthonormality_defect(state) <= 1e-10);
    // the dominant value never shrinks while tol_sv = 0
    CHECK(state.singular_values(0) >= top - 1e-12 * top);
    top = state.singular_values(0);
  }
}

TEST_CASE("right vectors can be left untracked", "[incremental]") {
  std::mt19937 gen(65);
  const MassMatrix mass = test_support::random_mass(gen, 5);
  IncrementalConfig config;
  config.track_right_vectors = false;
  SvdState state = initialize(test_support::random_vector(gen, 5), 0.5, mass, config);
  for (int j = 0; j < 4; ++j)
    update_two_weight(state, test_support::random_vector(gen, 5), 0.5, mass, config);
  CHECK(state.right_vectors.size() == 0);
  CHECK(state.rank() > 1);
  CHECK(state.columns_seen() == 5);
  CHECK_THROWS_WITH(temporal_functions(state), ContainsSubstring("right vectors not tracked"));
}

TEST_CASE("aggressive truncation reports discarded triplets", "[incremental]") {
  std::mt19937 gen(66);
  const MassMatrix mass = MassMatrix::identity(3);
  IncrementalConfig config;
  config.tol = 1e-12;
  SvdState state = initialize(Eigen::Vector3d(10, 0, 0), 1.0, mass, config);
  config.tol_sv = 5.0;  // discard anything at or below 5
  const UpdateReport report =
      update_two_weight(state, Eigen::Vector3d(0, 1, 0), 1.0, mass, config);
  CHECK(report.branch == UpdateBranch::RankIncrease);
  CHECK(report.truncated_count == 1);
  CHECK(state.rank() == 1);
}
