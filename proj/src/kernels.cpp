// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#include "mvugpca/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <vector>

namespace mvugpca::kernels {

#ifndef MVUGPCA_HAVE_AVX2_TU
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b) noexcept { return scalar::dot(a, b); }
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  return scalar::squared_distance(a, b);
}
}  // namespace avx2
#endif

namespace {

using BinaryKernel = double (*)(std::span<const double>, std::span<const double>) noexcept;

struct Dispatch {
  Isa isa;
  BinaryKernel dot;
  BinaryKernel squared_distance;
};

bool force_scalar() noexcept {
  const char* env = std::getenv("MVUGPCA_FORCE_SCALAR");
  return env != nullptr && std::strcmp(env, "") != 0 && std::strcmp(env, "0") != 0;
}

Dispatch select() noexcept {
  if (avx2_available() && !force_scalar()) return {Isa::Avx2, &avx2::dot, &avx2::squared_distance};
  return {Isa::Scalar, &scalar::dot, &scalar::squared_distance};
}

const Dispatch& table() noexcept {
  static const Dispatch d = select();
  return d;
}

std::vector<double> row_major_copy(const Eigen::MatrixXd& points) {
  const auto rows = points.rows();
  const auto cols = points.cols();
  std::vector<double> buf(static_cast<std::size_t>(rows * cols));
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(buf.data(), rows, cols) =
      points;
  return buf;
}

}  // namespace

bool avx2_available() noexcept {
#if defined(MVUGPCA_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

Isa active_isa() noexcept { return table().isa; }

std::string_view isa_name(Isa isa) noexcept { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

double dot(std::span<const double> a, std::span<const double> b) noexcept { return table().dot(a, b); }

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  return table().squared_distance(a, b);
}

Eigen::MatrixXd pairwise_squared_distances(const Eigen::MatrixXd& points) {
  const auto n = points.rows();
  const auto dim = static_cast<std::size_t>(points.cols());
  const auto buf = row_major_copy(points);
  const auto kernel = table().squared_distance;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::span<const double> xi(buf.data() + i * dim, dim);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = kernel(xi, std::span<const double>(buf.data() + j * dim, dim));
      out(i, j) = d;
      out(j, i) = d;
    }
  }
  return out;
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& points) {
  const auto n = points.rows();
  const auto dim = static_cast<std::size_t>(points.cols());
  const auto buf = row_major_copy(points);
  const auto kernel = table().dot;
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::span<const double> xi(buf.data() + i * dim, dim);
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = kernel(xi, std::span<const double>(buf.data() + j * dim, dim));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

}  // namespace mvugpca::kernels
