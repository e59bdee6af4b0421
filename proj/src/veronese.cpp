// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#include "mvugpca/veronese.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <utility>

#include "mvugpca/error.hpp"

namespace mvugpca::veronese {

namespace {

void enumerate(int var, int remaining, std::vector<int>& current, std::vector<std::vector<int>>& out) {
  const int D = static_cast<int>(current.size());
  if (var == D - 1) {
    current[static_cast<std::size_t>(var)] = remaining;
    out.push_back(current);
    return;
  }
  // Larger powers of earlier variables come first.
  for (int e = remaining; e >= 0; --e) {
    current[static_cast<std::size_t>(var)] = e;
    enumerate(var + 1, remaining - e, current, out);
  }
  current[static_cast<std::size_t>(var)] = 0;
}

struct CachedOrder {
  MonomialOrder order;
  std::map<std::vector<int>, Eigen::Index> lookup;
};

std::mutex cache_mutex;
std::map<std::pair<int, int>, std::unique_ptr<const CachedOrder>> cache;

const CachedOrder& cached(int D, int n) {
  const std::int64_t count = monomial_count(D, n);
  if (count > max_monomials)
    fail(ErrorKind::Input, "M_" + std::to_string(n) + "(" + std::to_string(D) + ") = " + std::to_string(count) +
                               " monomials exceeds the limit of " + std::to_string(max_monomials));
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[{D, n}];
  if (!slot) {
    auto built = std::make_unique<CachedOrder>();
    built->order.D = D;
    built->order.n = n;
    built->order.exponents.reserve(static_cast<std::size_t>(count));
    std::vector<int> current(static_cast<std::size_t>(D), 0);
    enumerate(0, n, current, built->order.exponents);
    for (std::size_t i = 0; i < built->order.exponents.size(); ++i)
      built->lookup.emplace(built->order.exponents[i], static_cast<Eigen::Index>(i));
    slot = std::move(built);
  }
  return *slot;
}

double ipow(double x, int e) {
  double r = 1.0;
  for (int k = 0; k < e; ++k) r *= x;
  return r;
}

void check_dims(const Eigen::VectorXd& x, int n) {
  if (x.size() < 1) fail(ErrorKind::Input, "empty vector");
  if (n < 1) fail(ErrorKind::Input, "degree must be at least 1");
}

}  // namespace

Eigen::Index MonomialOrder::index_of(const std::vector<int>& e) const {
  const auto& lookup = cached(D, n).lookup;
  const auto it = lookup.find(e);
  return it == lookup.end() ? -1 : it->second;
}

std::int64_t monomial_count(int D, int n) {
  if (D < 1 || n < 1) fail(ErrorKind::Input, "monomial_count needs D >= 1 and n >= 1");
  // C(top, k) = Π_{i=1..k} (top−k+i)/i with k the smaller of n, D−1. Each
  // partial product is itself a binomial coefficient, so r·factor is
  // divisible by i; cancelling gcd(r, i) first keeps the product small.
  const int k = std::min(n, D - 1);
  const std::int64_t top = static_cast<std::int64_t>(D) + n - 1;
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    const std::int64_t factor = top - k + i;
    std::int64_t next;
    const std::int64_t g = std::gcd(r, static_cast<std::int64_t>(i));
    const std::int64_t rr = r / g;
    const std::int64_t ff = factor / (i / g);
    if (__builtin_mul_overflow(rr, ff, &next))
      fail(ErrorKind::Input, "monomial count overflows for D = " + std::to_string(D) + ", n = " + std::to_string(n));
    r = next;
  }
  return r;
}

const MonomialOrder& monomial_order(int D, int n) { return cached(D, n).order; }

Eigen::VectorXd PolynomialBasis::evaluate(const Eigen::VectorXd& x) const {
  if (x.size() != D) fail(ErrorKind::Input, "point dimension does not match the polynomial basis");
  return coeffs * veronese_map(x, degree);
}

Eigen::VectorXd veronese_map(const Eigen::VectorXd& x, int n) {
  check_dims(x, n);
  const auto& order = monomial_order(static_cast<int>(x.size()), n);
  Eigen::VectorXd out(order.size());
  for (Eigen::Index i = 0; i < order.size(); ++i) {
    const auto& e = order.exponents[static_cast<std::size_t>(i)];
    double v = 1.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) v *= ipow(x(j), e[static_cast<std::size_t>(j)]);
    out(i) = v;
  }
  return out;
}

Eigen::MatrixXd veronese_jacobian(const Eigen::VectorXd& x, int n) {
  check_dims(x, n);
  const auto D = x.size();
  const auto& order = monomial_order(static_cast<int>(D), n);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order.size(), D);
  for (Eigen::Index i = 0; i < order.size(); ++i) {
    const auto& e = order.exponents[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < D; ++j) {
      const int ej = e[static_cast<std::size_t>(j)];
      if (ej == 0) continue;
      double v = ej;
      for (Eigen::Index k = 0; k < D; ++k) v *= ipow(x(k), e[static_cast<std::size_t>(k)] - (k == j ? 1 : 0));
      J(i, j) = v;
    }
  }
  return J;
}

Eigen::MatrixXd embedded_data_matrix(const Eigen::MatrixXd& points, int n) {
  if (points.rows() < 1 || points.cols() < 1) fail(ErrorKind::Input, "empty point set");
  const auto& order = monomial_order(static_cast<int>(points.cols()), n);
  Eigen::MatrixXd V(points.rows(), order.size());
  for (Eigen::Index r = 0; r < points.rows(); ++r) V.row(r) = veronese_map(points.row(r).transpose(), n).transpose();
  return V;
}

Eigen::MatrixXd embedded_data_matrix(const PointCloud& cloud, int n) { return embedded_data_matrix(cloud.points, n); }

Eigen::MatrixXd multiplication_matrix(const Eigen::VectorXd& b, int n) {
  if (n < 2) fail(ErrorKind::Input, "multiplication matrix needs degree n >= 2");
  check_dims(b, n);
  const int D = static_cast<int>(b.size());
  const auto& hi = monomial_order(D, n);
  const auto& lo = monomial_order(D, n - 1);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(hi.size(), lo.size());
  for (Eigen::Index col = 0; col < lo.size(); ++col) {
    std::vector<int> e = lo.exponents[static_cast<std::size_t>(col)];
    for (int j = 0; j < D; ++j) {
      ++e[static_cast<std::size_t>(j)];
      R(hi.index_of(e), col) += b(j);
      --e[static_cast<std::size_t>(j)];
    }
  }
  return R;
}

}  // namespace mvugpca::veronese
