// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mvugpca {

/// N points in R^D, one per row, with optional ground-truth classes.
struct PointCloud {
  Eigen::MatrixXd points;
  std::optional<std::vector<int>> labels;
  std::vector<std::string> source_ids;

  Eigen::Index size() const noexcept { return points.rows(); }
  Eigen::Index dim() const noexcept { return points.cols(); }

  /// Throws Error(Input) unless N ≥ 1, D ≥ 1, every coordinate is finite and
  /// the label / id vectors match N.
  void validate() const;

  /// Subset of rows in the given order; labels and ids follow.
  PointCloud select(const std::vector<int>& rows) const;
};

/// Default source ids "0", "1", ... for clouds that come from memory.
std::vector<std::string> index_ids(Eigen::Index n);

/// A linear subspace S of R^D stored through orthonormal bases of S and S⊥.
struct SubspaceModel {
  Eigen::MatrixXd basis;             // D × dim
  Eigen::MatrixXd complement_basis;  // D × (D − dim)

  int dim() const noexcept { return static_cast<int>(basis.cols()); }
  int codim() const noexcept { return static_cast<int>(complement_basis.cols()); }

  /// ‖complement_basisᵀ y‖, the distance from y to S.
  double distance(const Eigen::VectorXd& y) const { return (complement_basis.transpose() * y).norm(); }
};

struct SegmentationResult {
  std::vector<int> labels;             // per point, in [0, models.size())
  std::vector<SubspaceModel> models;   // extraction / vote order
  std::vector<int> votes;              // votes behind each model (voting only)
  std::vector<int> candidate_votes;    // every candidate tally, descending (voting only)
  std::vector<double> residuals;       // distance of each point to its model
  std::optional<int> misclassified;    // vs ground truth, when known
  std::vector<std::string> source_ids;
  std::map<std::string, double> diagnostics;
};

}  // namespace mvugpca
