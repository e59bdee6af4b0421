// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>
#include <vector>

#include "mvugpca/kernels.hpp"

using namespace mvugpca;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Long-double accumulation, independent of either kernel.
long double naive_dot(const std::vector<double>& a, const std::vector<double>& b, std::size_t off, std::size_t n) {
  long double s = 0;
  for (std::size_t i = 0; i < n; ++i) s += static_cast<long double>(a[off + i]) * b[off + i];
  return s;
}

long double naive_sqdist(const std::vector<double>& a, const std::vector<double>& b, std::size_t off, std::size_t n) {
  long double s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double d = static_cast<long double>(a[off + i]) - b[off + i];
    s += d * d;
  }
  return s;
}

}  // namespace

TEST_CASE("scalar and avx2 kernels agree on every length and offset") {
  std::mt19937_64 rng(11);
  // Lengths around the 4- and 16-wide unroll boundaries, plus image-sized.
  std::vector<std::size_t> lengths;
  for (std::size_t n = 0; n <= 70; ++n) lengths.push_back(n);
  lengths.push_back(1023);
  lengths.push_back(48000);
  for (std::size_t n : lengths) {
    for (std::size_t off : {0u, 1u, 3u}) {
      const auto a = random_vector(rng, n + off);
      const auto b = random_vector(rng, n + off);
      const std::span<const double> sa(a.data() + off, n), sb(b.data() + off, n);

      const double ref_dot = static_cast<double>(naive_dot(a, b, off, n));
      const double ref_sq = static_cast<double>(naive_sqdist(a, b, off, n));
      // Summation order differs; bound the error by n·eps·Σ|terms|.
      double mag_dot = 0, mag_sq = 0;
      for (std::size_t i = 0; i < n; ++i) {
        mag_dot += std::abs(a[off + i] * b[off + i]);
        mag_sq += (a[off + i] - b[off + i]) * (a[off + i] - b[off + i]);
      }
      const double tol_dot = 4e-16 * (static_cast<double>(n) + 1) * mag_dot + 1e-300;
      const double tol_sq = 4e-16 * (static_cast<double>(n) + 1) * mag_sq + 1e-300;

      CHECK(std::abs(kernels::scalar::dot(sa, sb) - ref_dot) <= tol_dot);
      CHECK(std::abs(kernels::avx2::dot(sa, sb) - ref_dot) <= tol_dot);
      CHECK(std::abs(kernels::scalar::squared_distance(sa, sb) - ref_sq) <= tol_sq);
      CHECK(std::abs(kernels::avx2::squared_distance(sa, sb) - ref_sq) <= tol_sq);
    }
  }
}

TEST_CASE("empty spans give zero") {
  const std::span<const double> e;
  CHECK(kernels::scalar::dot(e, e) == 0.0);
  CHECK(kernels::avx2::dot(e, e) == 0.0);
  CHECK(kernels::scalar::squared_distance(e, e) == 0.0);
  CHECK(kernels::avx2::squared_distance(e, e) == 0.0);
}

TEST_CASE("squared distance of a vector with itself is exactly zero") {
  std::mt19937_64 rng(5);
  const auto a = random_vector(rng, 37, 1e3);
  CHECK(kernels::scalar::squared_distance(a, a) == 0.0);
  CHECK(kernels::avx2::squared_distance(a, a) == 0.0);
  CHECK(kernels::squared_distance(a, a) == 0.0);
}

TEST_CASE("dispatch honours the environment override") {
  if (const char* env = std::getenv("MVUGPCA_FORCE_SCALAR"); env && std::string(env) == "1") {
    CHECK(kernels::active_isa() == kernels::Isa::Scalar);
  } else {
    CHECK(kernels::active_isa() == (kernels::avx2_available() ? kernels::Isa::Avx2 : kernels::Isa::Scalar));
  }
  MESSAGE("active kernels: " << kernels::isa_name(kernels::active_isa()));
}

TEST_CASE("pairwise distances and gram match Eigen expressions") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Eigen::MatrixXd X(13, 29);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = g(rng);

  const Eigen::MatrixXd D = kernels::pairwise_squared_distances(X);
  const Eigen::MatrixXd G = kernels::gram(X);
  const Eigen::MatrixXd G_ref = X * X.transpose();
  REQUIRE(D.rows() == 13);
  REQUIRE(D.cols() == 13);
  for (Eigen::Index i = 0; i < 13; ++i) {
    CHECK(D(i, i) == 0.0);
    for (Eigen::Index j = 0; j < 13; ++j) {
      CHECK(D(i, j) == D(j, i));
      CHECK(D(i, j) == doctest::Approx((X.row(i) - X.row(j)).squaredNorm()).epsilon(1e-13));
      CHECK(G(i, j) == doctest::Approx(G_ref(i, j)).epsilon(1e-12));
    }
  }
}
