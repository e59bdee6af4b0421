// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#include "mvugpca/kernels.hpp"

namespace mvugpca::kernels::scalar {

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace mvugpca::kernels::scalar
