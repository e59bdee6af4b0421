// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "mvugpca/types.hpp"
#include "mvugpca/veronese.hpp"

namespace mvugpca::gpca {

using veronese::PolynomialBasis;

/// Relative singular-value threshold used for every rank decision.
inline constexpr double default_eps_rank = 1e-8;
/// A gradient matrix counts as zero when no column is longer than this.
inline constexpr double default_eps_grad = 1e-10;

/// Right singular vectors of the embedded data matrix for its h smallest
/// singular values. h = 0 means auto: the number of σ_i below
/// eps_rank·σ_max, singular values missing because N < M_n(D) counting as
/// zero. Throws Error(Segmentation) when auto finds none, Error(Input) when
/// h ≥ M_n(D).
PolynomialBasis fit_vanishing_polynomials(const PointCloud& cloud, int n, int h = 0,
                                          double eps_rank = default_eps_rank);

/// D × h, column i = ∇p_i(y).
Eigen::MatrixXd evaluate_gradients(const PolynomialBasis& basis, const Eigen::VectorXd& y);

/// Index minimizing P(y)·(∇Pᵀ∇P)†·P(y)ᵀ over points outside `exclude` whose
/// gradient matrix is nonzero. Near-equal residuals go to the lowest index.
/// Throws Error(Segmentation) if every candidate gradient vanishes.
int select_representative(const PointCloud& cloud, const PolynomialBasis& basis, const std::set<int>& exclude = {},
                          double eps_rank = default_eps_rank, double eps_grad = default_eps_grad);

/// S⊥ from the leading left singular vectors of ∇P(w). The codimension is
/// the numerical rank unless `codim` fixes it.
SubspaceModel subspace_from_point(const PolynomialBasis& basis, const Eigen::VectorXd& w,
                                  std::optional<int> codim = std::nullopt, double eps_rank = default_eps_rank,
                                  double eps_grad = default_eps_grad);

/// Degree n−1 polynomials q with (bᵀx)·q(x) vanishing on the data for every
/// b in S⊥, i.e. the null space of the stacked V_n·R_n(b) blocks.
PolynomialBasis divide_out(const PolynomialBasis& basis, const SubspaceModel& model, const PointCloud& cloud,
                           double eps_rank = default_eps_rank);

/// Labels and distances for the closest model (ties to the lower index).
void assign(const Eigen::MatrixXd& points, SegmentationResult& result);

/// Fit, differentiate, divide; n models in extraction order. With `dims`
/// (one per subspace, any order) the basis size is the generic Hilbert
/// function of that arrangement and each extracted codimension snaps to the
/// nearest one still unused.
SegmentationResult segment_basic(const PointCloud& cloud, int n, const std::optional<std::vector<int>>& dims = {},
                                 double eps_rank = default_eps_rank);

struct VotingOptions {
  double tau = 0.4;  // radians, largest principal angle
  int h = 0;         // 0: generic Hilbert function of the requested codims
  double eps_rank = default_eps_rank;
  double eps_grad = default_eps_grad;
};

/// Every point votes, per distinct requested codimension c, for the span of
/// the c leading left singular vectors of ∇P(y). A vote joins the closest
/// candidate of that codimension when their angle is below tau; a candidate
/// with at least two votes is a cluster. The most-voted clusters fill the
/// requested codimensions. Throws Error(Segmentation) with "fewer than n
/// clusters" when some codimension runs short.
SegmentationResult segment_voting(const PointCloud& cloud, int n, const std::vector<int>& codims,
                                  const VotingOptions& opts = {});

/// Largest principal angle between equal-dimensional subspaces given by
/// orthonormal bases, in [0, π/2].
double subspace_angle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// Fewest mismatches over all bijections between label alphabets (both
/// alphabets at most 8 labels).
int segmentation_error(const std::vector<int>& labels, const std::vector<int>& truth);

/// Per point, whether it is counted in segmentation_error under the best
/// bijection.
std::vector<bool> misclassified_points(const std::vector<int>& labels, const std::vector<int>& truth);

/// dim I_n for n generic subspaces of R^D with the given codimensions: the
/// null-space dimension of V_n on random samples of a random arrangement.
int generic_hilbert_function(int D, const std::vector<int>& codims);

/// Orthonormal basis of the orthogonal complement of span(B) in R^D.
Eigen::MatrixXd orthogonal_complement(const Eigen::MatrixXd& B);

}  // namespace mvugpca::gpca
