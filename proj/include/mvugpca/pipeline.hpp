// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mvugpca/graph.hpp"
#include "mvugpca/mvu.hpp"
#include "mvugpca/types.hpp"

// unfold → segment wiring shared by the CLI and the end-to-end tests.
namespace mvugpca::pipeline {

struct PipelineConfig {
  int k = 4;
  int D_target = 5;
  int n_subspaces = 2;
  std::vector<int> d_sweep{1, 2, 3, 4};
  double tau = 0.4;
  mvu::SolverOptions solver;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  bool noise_free = false;  // basic GPCA instead of voting
  bool largest_component = false;
};

/// Sets one field by name. Keys: k, dim, n, d (comma list), tau, tol_feas,
/// tol_psd, max_iter, seed, noise_sigma, noise_free, largest_component,
/// backend (ip | al). Throws Error(Input) on unknown keys or bad values.
void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value);

/// `key = value` lines; blank lines and lines starting with '#' are skipped.
void apply_config_text(PipelineConfig& cfg, const std::string& text);
void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path);

/// For every key, PREFIX + upper-cased key (MVUGPCA_TOL_FEAS, ...) when the
/// lookup finds it. The default lookup is std::getenv.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
void apply_environment(PipelineConfig& cfg, const std::string& prefix = "MVUGPCA_", EnvLookup lookup = {});

std::vector<std::string> config_keys();

/// A directory is read as images (sorted by name, with optional labels.csv of
/// "filename,label" rows); anything else as CSV, the last column holding
/// labels when `csv_labels` is set.
PointCloud load_input(const std::filesystem::path& path, bool csv_labels);

struct UnfoldResult {
  PointCloud embedding;    // N × D_target; labels and ids carried over
  mvu::GramSolution solution;
  double spectrum_fraction = 0.0;
  std::vector<int> kept;   // input rows that were unfolded
  int n_components = 1;
  std::size_t edges_g = 0;
  std::size_t edges_gprime = 0;
};

/// k-NN graph, clique augmentation, SDP, spectral embedding. A disconnected
/// graph throws Error(Graph) listing each component's source ids unless
/// cfg.largest_component is set, in which case only that component is used.
UnfoldResult unfold(const PointCloud& cloud, const PipelineConfig& cfg);

/// Eigenvalues, spectrum_fraction, residuals and solver status as JSON.
std::string spectrum_json(const UnfoldResult& result, const PipelineConfig& cfg);

/// n_subspaces subspaces of dimension d in R^D: voting GPCA with every
/// codimension D − d, or basic GPCA with cfg.noise_free.
SegmentationResult segment(const PointCloud& cloud, int d, const PipelineConfig& cfg);

struct SweepCell {
  int d = 0;
  std::optional<SegmentationResult> result;
  std::string error;  // set when segmentation failed
};

/// One segmentation per d in cfg.d_sweep, run concurrently. Segmentation
/// and input errors are recorded per cell; anything else propagates.
std::vector<SweepCell> sweep(const PointCloud& cloud, const PipelineConfig& cfg);

struct TableRow {
  std::string name;
  int n_points = 0;
  std::vector<SweepCell> cells;
};

/// Rows = input sets, columns = d. Cells hold the error count, "-" without
/// ground truth, or "fail".
std::string table_csv(const std::vector<TableRow>& rows, const std::vector<int>& d_sweep);
std::string table_markdown(const std::vector<TableRow>& rows, const std::vector<int>& d_sweep);

/// x,y,label,misclassified per point of a 2-D embedding (misclassified is
/// empty without ground truth).
std::string plot_csv(const PointCloud& embedding, const SegmentationResult& result);

/// subspace,x,y: one unit direction per fitted line in the plane.
std::string lines_csv(const SegmentationResult& result);

}  // namespace mvugpca::pipeline
