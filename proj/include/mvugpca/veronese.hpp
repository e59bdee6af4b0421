// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mvugpca/types.hpp"

namespace mvugpca::veronese {

/// Largest M_n(D) the module will enumerate.
inline constexpr std::int64_t max_monomials = 100000;

/// Degree-n exponent vectors in D variables, graded lexicographic with
/// x_1 > x_2 > … > x_D. For D = 2, n = 2: (2,0), (1,1), (0,2).
struct MonomialOrder {
  int D = 0;
  int n = 0;
  std::vector<std::vector<int>> exponents;

  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(exponents.size()); }

  /// Position of an exponent vector, or -1 if it is not of this degree.
  Eigen::Index index_of(const std::vector<int>& e) const;
};

/// C(D+n−1, n). Throws Error(Input) for D < 1, n < 1 or a result past 2⁶³.
std::int64_t monomial_count(int D, int n);

/// Shared, immutable order for (D, n). Safe to call from several threads;
/// throws Error(Input) if M_n(D) exceeds max_monomials.
const MonomialOrder& monomial_order(int D, int n);

/// Homogeneous polynomials p_i(x) = coeffs.row(i)·ν_n(x).
struct PolynomialBasis {
  int degree = 0;
  int D = 0;
  Eigen::MatrixXd coeffs;  // h × M_n(D)

  Eigen::Index h() const noexcept { return coeffs.rows(); }

  /// (p_1(x), …, p_h(x)).
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const;
};

/// All degree-n monomials of x in MonomialOrder.
Eigen::VectorXd veronese_map(const Eigen::VectorXd& x, int n);

/// M_n(D) × D; row i is the gradient of monomial i at x.
Eigen::MatrixXd veronese_jacobian(const Eigen::VectorXd& x, int n);

/// N × M_n(D), row i = ν_n(y_i)ᵀ.
Eigen::MatrixXd embedded_data_matrix(const Eigen::MatrixXd& points, int n);
Eigen::MatrixXd embedded_data_matrix(const PointCloud& cloud, int n);

/// R_n(b), M_n(D) × M_{n−1}(D): (bᵀx)·(cᵀν_{n−1}(x)) = (R_n(b)c)ᵀν_n(x).
/// Requires n ≥ 2.
Eigen::MatrixXd multiplication_matrix(const Eigen::VectorXd& b, int n);

}  // namespace mvugpca::veronese
