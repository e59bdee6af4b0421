// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mvugpca/types.hpp"

namespace mvugpca::dataio {

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

/// Comma-separated reals with '.' decimals. A first row containing any
/// non-numeric cell is taken as a header and skipped. With `has_labels` the
/// last column holds integer class labels.
PointCloud load_csv(const std::filesystem::path& path, bool has_labels);
PointCloud parse_csv(const std::string& text, bool has_labels);

/// Writes points (and labels, if present) as CSV with 17 significant digits.
void write_csv(const PointCloud& cloud, const std::filesystem::path& path);

/// Grayscale image as a height × width matrix of raw intensities.
using Image = Eigen::MatrixXd;

/// Decodes PGM (P2/P5) or 8/16-bit grayscale PNG. RGB and RGBA inputs are
/// rejected.
Image read_image(const std::filesystem::path& path);
void write_pgm(const Image& image, const std::filesystem::path& path, bool binary = true);

/// Column-major flattening: entry (r, c) lands at index c·height + r.
Eigen::VectorXd stack_columns(const Image& image);
Image unstack_columns(const Eigen::VectorXd& vec, Eigen::Index height, Eigen::Index width);

/// One point per image, in path order. All images must share one size.
PointCloud load_images(const std::vector<std::filesystem::path>& paths);

/// Image files (.pgm, .png) directly inside `dir`, sorted by filename.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

PointCloud center(const PointCloud& cloud);

enum class ResultFormat { Json, Csv };

/// JSON keys: labels, bases, complement_bases, votes, metrics, diagnostics
/// (plus source_ids and candidate_votes). Bases are written as a list of
/// orthonormal vectors per subspace. CSV has one row per point:
/// source_id,label,distance.
void write_result(const SegmentationResult& result, const std::filesystem::path& path, ResultFormat format);
SegmentationResult read_result_json(const std::filesystem::path& path);

/// Writes text to a file, throwing Error(Input) on failure.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace mvugpca::dataio
