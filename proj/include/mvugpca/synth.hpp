// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mvugpca/types.hpp"

// Seeded generators for labelled test data. Output depends only on the
// arguments (mt19937_64 plus the standard library's distributions).
namespace mvugpca::synth {

struct SubspaceOptions {
  int D = 2;
  std::vector<int> dims{1, 1};  // one entry per subspace, each in [1, D)
  int points_per_subspace = 10;
  double noise_sigma = 0.0;     // per coordinate
  // Redraw until equal-dimensional pairs have largest principal angle at
  // least this (radians).
  double min_angle = 0.0;
  std::uint64_t seed = 0;
};

/// Points y = B·t with B a random orthonormal basis and t uniform in
/// [−1, 1]^d, plus Gaussian noise. Label j for subspace j, in order.
PointCloud subspaces(const SubspaceOptions& opts);

/// Orthonormal bases of the subspaces `subspaces(opts)` samples from.
std::vector<Eigen::MatrixXd> subspace_bases(const SubspaceOptions& opts);

struct ArcOptions {
  int N = 50;
  int D = 3;
  double radius = 1.0;
  double pitch = 0.3;   // rise per radian; 0 gives a circular arc
  double turns = 1.5;   // total angle / 2π
  std::uint64_t seed = 0;
};

/// Helix arc sampled at equal arc length, so all consecutive chords are
/// equal, placed in R^D by a random rotation. D ≥ 3 (D = 2 needs pitch 0).
PointCloud curved_arc(const ArcOptions& opts);

struct SheetOptions {
  int rows = 8;
  int cols = 8;
  int D = 3;
  double spacing = 0.25;
  double radius = 1.0;  // the sheet is rolled onto a cylinder of this radius
  std::uint64_t seed = 0;
};

/// Square grid rolled isometrically onto a cylinder, in R^D (D ≥ 3).
PointCloud curved_sheet(const SheetOptions& opts);

struct ExpressionOptions {
  int points = 30;  // even
  int D_high = 100;
  double noise_sigma = 0.0;  // expected norm of the lift noise
  double bend = 0.05;        // amplitude of the extra sinusoidal coordinates
  int extra_dims = 8;
  std::uint64_t seed = 0;
};

/// Two straight segments crossing at their midpoints in the plane, at a
/// seeded angle in [π/3, 2π/3], lifted into R^D_high by
/// u ↦ Q·(u, a·sin(ω_1ᵀu + φ_1), …, a·sin(ω_mᵀu + φ_m)) with Q orthonormal.
/// Points are split into two even counts as equal as possible, spaced
/// symmetrically about the crossing with no point on it. Labels 0 and 1.
PointCloud expression_like(const ExpressionOptions& opts);

/// Random D × d matrix with orthonormal columns.
Eigen::MatrixXd random_orthonormal(int D, int d, std::uint64_t seed);

}  // namespace mvugpca::synth
