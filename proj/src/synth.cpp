// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#include "mvugpca/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "mvugpca/error.hpp"
#include "mvugpca/gpca.hpp"

namespace mvugpca::synth {

namespace {

using Rng = std::mt19937_64;

Eigen::MatrixXd gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols, double sigma = 1.0) {
  std::normal_distribution<double> dist(0.0, sigma);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
  return m;
}

Eigen::MatrixXd orthonormal(Rng& rng, int D, int d) {
  const Eigen::MatrixXd G = gaussian(rng, D, d);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(D, d);
  // Sign convention R_ii > 0 makes Q a function of G alone.
  const Eigen::MatrixXd R = qr.matrixQR();
  for (int i = 0; i < d; ++i)
    if (R(i, i) < 0) Q.col(i) = -Q.col(i);
  return Q;
}

void check_subspace_options(const SubspaceOptions& o) {
  if (o.D < 1) fail(ErrorKind::Input, "D must be positive");
  if (o.dims.empty()) fail(ErrorKind::Input, "need at least one subspace");
  for (int d : o.dims)
    if (d < 1 || d >= o.D)
      fail(ErrorKind::Input, "subspace dimension " + std::to_string(d) + " outside [1, " + std::to_string(o.D) + ")");
  if (o.points_per_subspace < 1) fail(ErrorKind::Input, "points per subspace must be positive");
  if (o.noise_sigma < 0) fail(ErrorKind::Input, "noise sigma must be non-negative");
}

std::vector<Eigen::MatrixXd> draw_bases(Rng& rng, const SubspaceOptions& o) {
  constexpr int max_draws = 10000;
  for (int attempt = 0; attempt < max_draws; ++attempt) {
    std::vector<Eigen::MatrixXd> bases;
    for (int d : o.dims) bases.push_back(orthonormal(rng, o.D, d));
    bool ok = true;
    for (std::size_t a = 0; ok && a < bases.size(); ++a)
      for (std::size_t b = a + 1; ok && b < bases.size(); ++b)
        if (bases[a].cols() == bases[b].cols() && gpca::subspace_angle(bases[a], bases[b]) < o.min_angle) ok = false;
    if (ok) return bases;
  }
  fail(ErrorKind::Input, "no arrangement met min_angle after " + std::to_string(max_draws) + " draws");
}

}  // namespace

Eigen::MatrixXd random_orthonormal(int D, int d, std::uint64_t seed) {
  if (d < 1 || d > D) fail(ErrorKind::Input, "need 1 <= d <= D");
  Rng rng(seed);
  return orthonormal(rng, D, d);
}

std::vector<Eigen::MatrixXd> subspace_bases(const SubspaceOptions& opts) {
  check_subspace_options(opts);
  Rng rng(opts.seed);
  return draw_bases(rng, opts);
}

PointCloud subspaces(const SubspaceOptions& opts) {
  check_subspace_options(opts);
  Rng rng(opts.seed);
  const auto bases = draw_bases(rng, opts);
  const int per = opts.points_per_subspace;
  const int total = per * static_cast<int>(bases.size());

  PointCloud cloud;
  cloud.points.resize(total, opts.D);
  std::vector<int> labels(static_cast<std::size_t>(total));
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  int row = 0;
  for (std::size_t j = 0; j < bases.size(); ++j) {
    for (int p = 0; p < per; ++p, ++row) {
      Eigen::VectorXd t(bases[j].cols());
      for (Eigen::Index c = 0; c < t.size(); ++c) t(c) = coef(rng);
      cloud.points.row(row) = (bases[j] * t).transpose();
      labels[static_cast<std::size_t>(row)] = static_cast<int>(j);
    }
  }
  if (opts.noise_sigma > 0) cloud.points += gaussian(rng, total, opts.D, opts.noise_sigma);
  cloud.labels = std::move(labels);
  cloud.source_ids = index_ids(total);
  return cloud;
}

PointCloud curved_arc(const ArcOptions& opts) {
  if (opts.N < 2) fail(ErrorKind::Input, "arc needs at least two points");
  if (opts.radius <= 0 || opts.turns <= 0) fail(ErrorKind::Input, "arc radius and turns must be positive");
  if (opts.D < 2 || (opts.D == 2 && opts.pitch != 0.0))
    fail(ErrorKind::Input, "arc needs D >= 3, or D = 2 with pitch 0");
  const int native = opts.pitch == 0.0 ? 2 : 3;
  Eigen::MatrixXd base(opts.N, native);
  const double span = 2.0 * std::numbers::pi * opts.turns;
  for (int i = 0; i < opts.N; ++i) {
    // θ is proportional to arc length on a helix.
    const double th = span * i / (opts.N - 1);
    base(i, 0) = opts.radius * std::cos(th);
    base(i, 1) = opts.radius * std::sin(th);
    if (native == 3) base(i, 2) = opts.pitch * th;
  }
  Rng rng(opts.seed);
  const Eigen::MatrixXd Q = orthonormal(rng, opts.D, native);
  PointCloud cloud;
  cloud.points = base * Q.transpose();
  cloud.source_ids = index_ids(opts.N);
  return cloud;
}

PointCloud curved_sheet(const SheetOptions& opts) {
  if (opts.rows < 2 || opts.cols < 2) fail(ErrorKind::Input, "sheet needs at least 2 x 2 points");
  if (opts.D < 3) fail(ErrorKind::Input, "sheet needs D >= 3");
  if (opts.spacing <= 0 || opts.radius <= 0) fail(ErrorKind::Input, "sheet spacing and radius must be positive");
  const int N = opts.rows * opts.cols;
  Eigen::MatrixXd base(N, 3);
  for (int r = 0; r < opts.rows; ++r)
    for (int c = 0; c < opts.cols; ++c) {
      const double s = opts.spacing * c;
      const double v = opts.spacing * r;
      const int i = r * opts.cols + c;
      base(i, 0) = opts.radius * std::sin(s / opts.radius);
      base(i, 1) = v;
      base(i, 2) = opts.radius * (1.0 - std::cos(s / opts.radius));
    }
  Rng rng(opts.seed);
  const Eigen::MatrixXd Q = orthonormal(rng, opts.D, 3);
  PointCloud cloud;
  cloud.points = base * Q.transpose();
  cloud.source_ids = index_ids(N);
  return cloud;
}

PointCloud expression_like(const ExpressionOptions& opts) {
  if (opts.points < 4 || opts.points % 2 != 0)
    fail(ErrorKind::Input, "expression-like data needs an even number of points, at least 4");
  if (opts.extra_dims < 0 || opts.D_high < 2 + opts.extra_dims)
    fail(ErrorKind::Input, "D_high must be at least 2 + extra_dims");
  if (opts.noise_sigma < 0 || opts.bend < 0) fail(ErrorKind::Input, "noise and bend must be non-negative");

  // Two even counts so each segment is symmetric about the crossing.
  int first = opts.points / 2;
  int second = opts.points - first;
  if (first % 2 != 0) {
    ++first;
    --second;
  }
  const double h = 2.0 / std::max(first, second);

  Rng rng(opts.seed);
  std::uniform_real_distribution<double> angle_dist(std::numbers::pi / 3, 2 * std::numbers::pi / 3);
  const double phi = angle_dist(rng);
  const Eigen::Vector2d dir_a(1.0, 0.0);
  const Eigen::Vector2d dir_b(std::cos(phi), std::sin(phi));

  const int m = opts.extra_dims;
  Eigen::MatrixXd omega(m, 2);
  Eigen::VectorXd offset(m);
  std::uniform_real_distribution<double> freq(1.0, 3.0);
  std::uniform_real_distribution<double> unit(0.0, 2 * std::numbers::pi);
  for (int k = 0; k < m; ++k) {
    const double w = freq(rng);
    const double a = unit(rng);
    omega(k, 0) = w * std::cos(a);
    omega(k, 1) = w * std::sin(a);
    offset(k) = unit(rng);
  }
  const Eigen::MatrixXd Q = orthonormal(rng, opts.D_high, 2 + m);

  const int N = first + second;
  PointCloud cloud;
  cloud.points.resize(N, opts.D_high);
  std::vector<int> labels(static_cast<std::size_t>(N));
  int row = 0;
  auto emit = [&](const Eigen::Vector2d& dir, int count, int label) {
    for (int j = 0; j < count; ++j, ++row) {
      const int half = count / 2;
      const double t = j < half ? -(half - j - 0.5) * h : (j - half + 0.5) * h;
      const Eigen::Vector2d u = t * dir;
      Eigen::VectorXd z(2 + m);
      z.head<2>() = u;
      for (int k = 0; k < m; ++k) z(2 + k) = opts.bend * std::sin(omega.row(k).dot(u) + offset(k));
      cloud.points.row(row) = (Q * z).transpose();
      labels[static_cast<std::size_t>(row)] = label;
    }
  };
  emit(dir_a, first, 0);
  emit(dir_b, second, 1);
  if (opts.noise_sigma > 0)
    cloud.points += gaussian(rng, N, opts.D_high, opts.noise_sigma / std::sqrt(static_cast<double>(opts.D_high)));
  cloud.labels = std::move(labels);
  cloud.source_ids = index_ids(N);
  return cloud;
}

}  // namespace mvugpca::synth
