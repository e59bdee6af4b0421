// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include <Eigen/Dense>

namespace mvugpca::kernels {

// Dense inner loops over long coordinate vectors (image points reach tens of
// thousands of dimensions). Each kernel has a scalar reference and, on x86-64,
// an AVX2/FMA variant. The variant is picked once at startup from CPUID; set
// MVUGPCA_FORCE_SCALAR=1 in the environment to pin the reference path.

enum class Isa { Scalar, Avx2 };

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b) noexcept;
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;
}  // namespace scalar

namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b) noexcept;
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;
}  // namespace avx2

/// True when the AVX2 variant was compiled in and the CPU reports AVX2+FMA.
bool avx2_available() noexcept;

/// ISA used by the dispatched entry points below.
Isa active_isa() noexcept;
std::string_view isa_name(Isa isa) noexcept;

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

/// Symmetric N×N matrix of squared Euclidean distances between the rows of
/// `points`. Rows are copied into contiguous storage once so the kernels run
/// on unit-stride memory regardless of the source layout.
Eigen::MatrixXd pairwise_squared_distances(const Eigen::MatrixXd& points);

/// Gram matrix points·pointsᵀ using the dispatched dot kernel.
Eigen::MatrixXd gram(const Eigen::MatrixXd& points);

}  // namespace mvugpca::kernels
