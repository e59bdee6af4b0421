// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mvugpca/graph.hpp"
#include "mvugpca/mvu.hpp"

using namespace mvugpca;

namespace {

PointCloud cloud_of(const Eigen::MatrixXd& pts) {
  PointCloud c;
  c.points = pts;
  c.source_ids = index_ids(pts.rows());
  return c;
}

PointCloud random_cloud(std::uint64_t seed, int n, int dim) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd pts(n, dim);
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = g(rng);
  return cloud_of(pts);
}

// Planar zigzag: a chain of unit steps that MVU should straighten.
PointCloud zigzag(int n, double angle) {
  Eigen::MatrixXd pts(n, 2);
  double x = 0, y = 0;
  for (int i = 0; i < n; ++i) {
    pts(i, 0) = x;
    pts(i, 1) = y;
    x += std::cos(angle);
    y += (i % 2 == 0 ? 1 : -1) * std::sin(angle);
  }
  return cloud_of(pts);
}

mvu::SdpProblem problem_for(const PointCloud& c, int k) {
  return mvu::assemble(graph::augment_cliques(graph::build_knn(c, k), c));
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("assemble") {
  SUBCASE("single edge") {
    Eigen::MatrixXd pts(2, 1);
    pts << 0, 2;
    const auto p = problem_for(cloud_of(pts), 1);
    CHECK(p.n == 2);
    REQUIRE(p.constraints.size() == 1);
    CHECK(p.constraints[0].i == 0);
    CHECK(p.constraints[0].j == 1);
    CHECK(p.constraints[0].target == 4.0);
  }
  SUBCASE("triangle") {
    Eigen::MatrixXd pts(3, 1);
    pts << 0, 1, 2;
    const auto p = problem_for(cloud_of(pts), 2);
    REQUIRE(p.constraints.size() == 3);
    std::vector<double> targets;
    for (const auto& c : p.constraints) targets.push_back(c.target);
    std::sort(targets.begin(), targets.end());
    CHECK(targets == std::vector<double>{1, 1, 4});
  }
  SUBCASE("no edges") {
    graph::NeighborGraph g;
    g.n_vertices = 3;
    g.neighbors.resize(3);
    try {
      mvu::assemble(g);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Graph);
      CHECK(std::string(e.what()).find("unbounded program") != std::string::npos);
    }
  }
}

TEST_CASE("two points: the feasible set is one matrix") {
  mvu::SdpProblem p{2, {{0, 1, 4.0}}};
  for (auto backend : {mvu::Backend::InteriorPoint, mvu::Backend::AugmentedLagrangian}) {
    mvu::SolverOptions o;
    o.backend = backend;
    const auto s = mvu::solve(p, o);
    Eigen::Matrix2d expect;
    expect << 1, -1, -1, 1;
    CHECK(max_abs(s.K - expect) < 1e-6);
    CHECK(s.objective == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(s.converged);

    const auto e = mvu::embed(s, mvu::ExplicitDim{1});
    CHECK(std::abs(std::abs(e.Y(0, 0)) - 1.0) < 1e-6);
    CHECK(e.Y(0, 0) == doctest::Approx(-e.Y(1, 0)).epsilon(1e-6));
  }
}

TEST_CASE("complete graph reproduces the centered Gram matrix") {
  const auto c = random_cloud(21, 3, 2);
  const auto p = problem_for(c, 2);
  REQUIRE(p.constraints.size() == 3);
  const Eigen::MatrixXd G = mvu::centered_gram(c.points);

  // Oracle: classical double centering of the squared distances.
  Eigen::MatrixXd D2(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) D2(i, j) = (c.points.row(i) - c.points.row(j)).squaredNorm();
  const Eigen::MatrixXd J = Eigen::MatrixXd::Identity(3, 3) - Eigen::MatrixXd::Constant(3, 3, 1.0 / 3);
  const Eigen::MatrixXd B = -0.5 * J * D2 * J;
  CHECK(max_abs(G - B) < 1e-12);

  const Eigen::RowVectorXd mean = c.points.colwise().mean();
  const double trace = (c.points.rowwise() - mean).squaredNorm();

  for (bool exact : {true, false}) {
    for (auto backend : {mvu::Backend::InteriorPoint, mvu::Backend::AugmentedLagrangian}) {
      mvu::SolverOptions o;
      o.backend = backend;
      o.exact_complete_graph = exact;
      if (backend == mvu::Backend::AugmentedLagrangian) o.initial = G;
      const auto s = mvu::solve(p, o);
      CHECK(max_abs(s.K - B) < 1e-5 * (1 + max_abs(B)));
      CHECK(s.objective == doctest::Approx(trace).epsilon(1e-6));
      if (exact) CHECK(s.iterations == 0);
    }
  }
}

TEST_CASE("an unreachable tolerance reports the residuals") {
  auto p = problem_for(zigzag(8, 0.6), 2);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (auto& c : p.constraints) c.target *= 1.0 + u(rng);
  for (auto backend : {mvu::Backend::InteriorPoint, mvu::Backend::AugmentedLagrangian}) {
    mvu::SolverOptions o;
    o.backend = backend;
    o.tol_feas = 0.0;
    o.max_iter = backend == mvu::Backend::InteriorPoint ? 30 : 300;
    try {
      mvu::solve(p, o);
      FAIL("expected a solver error");
    } catch (const mvu::SolverError& e) {
      CHECK(e.kind() == ErrorKind::Solver);
      CHECK(e.last().iteration > 0);
      CHECK(std::string(e.what()).find("residual") != std::string::npos);
    }
  }
}

TEST_CASE("embed") {
  SUBCASE("2x2 by hand") {
    mvu::GramSolution s;
    s.K = Eigen::Matrix2d{{1, -1}, {-1, 1}};
    s.eigenvalues = Eigen::Vector2d(2, 0);
    s.eigenvectors = Eigen::Matrix2d{{1, 1}, {-1, 1}} / std::sqrt(2.0);
    const auto e = mvu::embed(s, mvu::ExplicitDim{1});
    CHECK(e.retained_dims == 1);
    CHECK(e.Y(0, 0) == doctest::Approx(1.0));
    CHECK(e.Y(1, 0) == doctest::Approx(-1.0));
    CHECK(e.spectrum_fraction == doctest::Approx(1.0));
  }
  SUBCASE("zero matrix") {
    mvu::GramSolution s;
    s.K = Eigen::MatrixXd::Zero(1, 1);
    s.eigenvalues = Eigen::VectorXd::Zero(1);
    s.eigenvectors = Eigen::MatrixXd::Identity(1, 1);
    CHECK_THROWS_AS(mvu::embed(s, mvu::ExplicitDim{1}), Error);
  }
  SUBCASE("spectrum threshold") {
    mvu::GramSolution s;
    s.eigenvalues = Eigen::Vector3d(10, 5, 1e-12);
    s.eigenvectors = Eigen::MatrixXd::Identity(3, 3);
    s.K = s.eigenvalues.asDiagonal();
    const auto e = mvu::embed(s, mvu::SpectrumThreshold{0.99});
    CHECK(e.retained_dims == 2);
    CHECK(e.spectrum_fraction == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mvu::embed(s, mvu::AllNonzero{}).retained_dims == 2);
    CHECK(mvu::nonzero_rank(s.eigenvalues) == 2);
  }
  SUBCASE("explicit d out of range") {
    mvu::GramSolution s;
    s.eigenvalues = Eigen::Vector2d(2, 1);
    s.eigenvectors = Eigen::MatrixXd::Identity(2, 2);
    s.K = s.eigenvalues.asDiagonal();
    CHECK_THROWS_AS(mvu::embed(s, mvu::ExplicitDim{0}), Error);
    CHECK_THROWS_AS(mvu::embed(s, mvu::ExplicitDim{3}), Error);
  }
}

TEST_CASE("solutions satisfy the embedding properties") {
  const auto c = zigzag(12, 0.5);
  const auto p = problem_for(c, 2);
  const auto s = mvu::solve(p);
  REQUIRE(s.converged);

  CHECK(s.primal_residual <= 1e-6);
  CHECK(s.centering_residual <= 1e-6);
  CHECK(s.min_eigenvalue >= -1e-8 * s.eigenvalues(0));
  CHECK(mvu::primal_residual(p, s.K) <= 1e-6);

  for (Eigen::Index i = 1; i < s.eigenvalues.size(); ++i) CHECK(s.eigenvalues(i) <= s.eigenvalues(i - 1));

  const auto all = mvu::embed(s, mvu::AllNonzero{});
  const double phi = mvu::pairwise_variance(all.Y);
  CHECK(phi == doctest::Approx(s.objective).epsilon(1e-8));
  CHECK(all.Y.colwise().sum().cwiseAbs().maxCoeff() < 1e-6 * std::sqrt(s.objective));

  for (const auto& con : p.constraints) {
    const double d2 = (all.Y.row(con.i) - all.Y.row(con.j)).squaredNorm();
    CHECK(std::abs(d2 - con.target) <= 1e-6 * std::max(con.target, 1.0));
  }

  double prev = 0.0;
  for (int d = 1; d <= all.retained_dims; ++d) {
    const double f = mvu::embed(s, mvu::ExplicitDim{d}).spectrum_fraction;
    CHECK(f >= prev);
    prev = f;
  }
}

TEST_CASE("a chain held only by its links straightens out") {
  // Unit steps, so the optimum puts the points at 0..11: tr K = Σ (i − 5.5)².
  const auto s = mvu::solve(problem_for(zigzag(12, 0.5), 1));
  REQUIRE(s.converged);
  CHECK(s.objective == doctest::Approx(143.0).epsilon(1e-6));
  CHECK(s.eigenvalues(0) / s.objective > 1 - 1e-6);
}

TEST_CASE("rigid motions do not change the solution") {
  const auto c = random_cloud(8, 20, 3);
  Eigen::Matrix3d R = Eigen::AngleAxisd(1.1, Eigen::Vector3d(0, 1, 1).normalized()).toRotationMatrix();
  PointCloud moved = c;
  moved.points = (c.points * R.transpose()).rowwise() + Eigen::RowVector3d(-3, 4, 0.5);
  const auto a = mvu::solve(problem_for(c, 4));
  const auto b = mvu::solve(problem_for(moved, 4));
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-6));
  CHECK(max_abs(a.K - b.K) <= 1e-5 * a.objective);
}

TEST_CASE("both backends find the same optimum") {
  auto check_pair = [](const PointCloud& c, int k, bool unique) {
    const auto p = problem_for(c, k);
    mvu::SolverOptions al;
    al.backend = mvu::Backend::AugmentedLagrangian;
    al.initial = mvu::centered_gram(c.points);
    const auto a = mvu::solve(p);
    const auto b = mvu::solve(p, al);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-5));
    // Random clouds can have a flat optimal face; compare K only where the
    // optimum is a single matrix.
    if (unique) CHECK(max_abs(a.K - b.K) <= 1e-4 * a.objective);
  };
  for (int n : {4, 6}) {
    check_pair(zigzag(n, 0.5), 1, true);
    check_pair(zigzag(n, 0.5), 2, true);
  }
  for (std::uint64_t seed : {1u, 2u, 3u}) check_pair(random_cloud(seed, 5, 2), 2, false);
}

TEST_CASE("an unconverged augmented Lagrangian run still returns a feasible matrix") {
  const auto c = zigzag(8, 0.5);
  const auto p = problem_for(c, 1);
  mvu::SolverOptions al;
  al.backend = mvu::Backend::AugmentedLagrangian;
  al.initial = mvu::centered_gram(c.points);
  al.max_iter = 500;
  const auto s = mvu::solve(p, al);
  CHECK_FALSE(s.converged);
  CHECK(s.iterations == 500);
  CHECK(mvu::primal_residual(p, s.K) <= 1e-6);
  CHECK(s.objective >= al.initial->trace() * (1 - 1e-9));
}

TEST_CASE("the optimum is at least the input Gram trace") {
  const auto c = random_cloud(12, 15, 4);
  const auto s = mvu::solve(problem_for(c, 3));
  const double start = mvu::centered_gram(c.points).trace();
  CHECK(s.objective >= start * (1 - 1e-8));
}

TEST_CASE("trace callback and CSV sink") {
  const auto p = problem_for(zigzag(6, 0.4), 2);
  std::ostringstream out;
  mvu::SolverOptions o;
  o.trace = mvu::write_trace_csv(out);
  const auto s = mvu::solve(p, o);
  const std::string text = out.str();
  CHECK(text.rfind("iteration,", 0) == 0);
  // Header, the starting point, then one line per step.
  const auto lines = std::count(text.begin(), text.end(), '\n');
  CHECK(lines == s.iterations + 2);
}

TEST_CASE("residual helpers") {
  mvu::SdpProblem p{2, {{0, 1, 4.0}}};
  Eigen::Matrix2d K;
  K << 1, -1, -1, 1;
  CHECK(mvu::primal_residual(p, K) == 0.0);
  CHECK(mvu::centering_residual(K) == 0.0);
  K *= 1.5;  // distance 6 against target 4
  CHECK(mvu::primal_residual(p, K) == doctest::Approx(0.5));
}
