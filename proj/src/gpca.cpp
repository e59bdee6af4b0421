// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#include "mvugpca/gpca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "mvugpca/error.hpp"

namespace mvugpca::gpca {

namespace {

// Singular values of an r × c matrix padded with zeros to length c, in
// decreasing order, together with the full right singular basis.
struct RightSvd {
  Eigen::VectorXd sigma;
  Eigen::MatrixXd V;
};

RightSvd right_svd(const Eigen::MatrixXd& A) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  RightSvd out;
  out.sigma = Eigen::VectorXd::Zero(A.cols());
  out.sigma.head(svd.singularValues().size()) = svd.singularValues();
  out.V = svd.matrixV();
  return out;
}

// Right singular vectors of the trailing `count` singular values, as rows.
Eigen::MatrixXd trailing_rows(const RightSvd& s, Eigen::Index count) {
  return s.V.rightCols(count).transpose();
}

Eigen::Index count_below(const Eigen::VectorXd& sigma, double eps_rank) {
  const double top = sigma.size() ? sigma.maxCoeff() : 0.0;
  Eigen::Index c = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) c += !(sigma(i) > eps_rank * top);
  return c;
}

double max_norm(const Eigen::MatrixXd& points) {
  return points.rows() ? points.rowwise().norm().maxCoeff() : 0.0;
}

struct Candidate {
  int codim = 0;
  int votes = 0;
  int order = 0;                   // creation index, breaks vote ties
  Eigen::MatrixXd projector_sum;   // Σ B Bᵀ over merged votes
  Eigen::MatrixXd mean;            // D × codim
};

Eigen::MatrixXd leading_eigenvectors(const Eigen::MatrixXd& S, int count) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  return eig.eigenvectors().rightCols(count).rowwise().reverse();
}

SubspaceModel model_from_complement(const Eigen::MatrixXd& complement) {
  SubspaceModel m;
  m.complement_basis = complement;
  m.basis = orthogonal_complement(complement);
  return m;
}

}  // namespace

Eigen::MatrixXd orthogonal_complement(const Eigen::MatrixXd& B) {
  const auto D = B.rows();
  if (B.cols() == 0) return Eigen::MatrixXd::Identity(D, D);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeFullU);
  return svd.matrixU().rightCols(D - B.cols());
}

PolynomialBasis fit_vanishing_polynomials(const PointCloud& cloud, int n, int h, double eps_rank) {
  if (n < 1) fail(ErrorKind::Input, "subspace count n must be at least 1");
  if (cloud.size() < 1) fail(ErrorKind::Input, "empty point cloud");
  const int D = static_cast<int>(cloud.dim());
  const Eigen::MatrixXd Vn = veronese::embedded_data_matrix(cloud.points, n);
  const auto M = Vn.cols();
  const RightSvd s = right_svd(Vn);
  Eigen::Index count = h;
  if (h == 0) {
    count = count_below(s.sigma, eps_rank);
    if (count == 0)
      fail(ErrorKind::Segmentation,
           "no vanishing polynomial of degree " + std::to_string(n) + " at tolerance (wrong n or too much noise)");
  }
  if (count < 1 || count > M - 1)
    fail(ErrorKind::Input, "basis size h = " + std::to_string(count) + " outside [1, " + std::to_string(M - 1) + "]");
  return {n, D, trailing_rows(s, count)};
}

Eigen::MatrixXd evaluate_gradients(const PolynomialBasis& basis, const Eigen::VectorXd& y) {
  if (basis.h() == 0) fail(ErrorKind::Input, "empty polynomial basis");
  if (y.size() != basis.D) fail(ErrorKind::Input, "point dimension does not match the polynomial basis");
  return veronese::veronese_jacobian(y, basis.degree).transpose() * basis.coeffs.transpose();
}

int select_representative(const PointCloud& cloud, const PolynomialBasis& basis, const std::set<int>& exclude,
                          double eps_rank, double eps_grad) {
  std::vector<double> residual(static_cast<std::size_t>(cloud.size()), std::numeric_limits<double>::infinity());
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    if (exclude.count(static_cast<int>(i))) continue;
    const Eigen::VectorXd y = cloud.points.row(i).transpose();
    const Eigen::MatrixXd G = evaluate_gradients(basis, y);
    if (!(G.colwise().norm().maxCoeff() > eps_grad)) continue;
    const Eigen::VectorXd P = basis.evaluate(y);
    // Pᵀ(GᵀG)†P through the SVD of G: Σ_k (v_kᵀP)² / s_k².
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    double r = 0.0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
      if (!(sv(k) > eps_rank * sv(0))) break;
      const double proj = svd.matrixV().col(k).dot(P);
      r += proj * proj / (sv(k) * sv(k));
    }
    residual[static_cast<std::size_t>(i)] = r;
    best = std::min(best, r);
  }
  if (!std::isfinite(best)) fail(ErrorKind::Segmentation, "all gradients vanish");
  // Exact samples differ only by rounding; treat those as a tie.
  const double slack = std::pow(1e-10 * std::max(max_norm(cloud.points), 1.0), 2);
  for (std::size_t i = 0; i < residual.size(); ++i)
    if (residual[i] <= best + slack) return static_cast<int>(i);
  return -1;  // unreachable
}

SubspaceModel subspace_from_point(const PolynomialBasis& basis, const Eigen::VectorXd& w, std::optional<int> codim,
                                  double eps_rank, double eps_grad) {
  const Eigen::MatrixXd G = evaluate_gradients(basis, w);
  if (!(G.colwise().norm().maxCoeff() > eps_grad)) fail(ErrorKind::Segmentation, "zero gradient at representative point");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeFullU);
  const Eigen::VectorXd& sv = svd.singularValues();
  int c = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) c += sv(k) > eps_rank * sv(0);
  if (codim) {
    if (*codim < 1 || *codim > basis.D - 1)
      fail(ErrorKind::Input, "codimension " + std::to_string(*codim) + " outside [1, " + std::to_string(basis.D - 1) + "]");
    c = *codim;
  }
  SubspaceModel m;
  m.complement_basis = svd.matrixU().leftCols(c);
  m.basis = svd.matrixU().rightCols(basis.D - c);
  return m;
}

PolynomialBasis divide_out(const PolynomialBasis& basis, const SubspaceModel& model, const PointCloud& cloud,
                           double eps_rank) {
  if (basis.degree < 2) fail(ErrorKind::Input, "cannot divide a degree-" + std::to_string(basis.degree) + " basis");
  if (model.codim() < 1) fail(ErrorKind::Input, "subspace model has no complement");
  const Eigen::MatrixXd Vn = veronese::embedded_data_matrix(cloud.points, basis.degree);
  const auto N = Vn.rows();
  const auto cols = veronese::monomial_count(basis.D, basis.degree - 1);
  Eigen::MatrixXd stacked(N * model.codim(), cols);
  for (int k = 0; k < model.codim(); ++k)
    stacked.middleRows(k * N, N) = Vn * veronese::multiplication_matrix(model.complement_basis.col(k), basis.degree);
  const RightSvd s = right_svd(stacked);
  const Eigen::Index nullity = count_below(s.sigma, eps_rank);
  if (nullity == 0) fail(ErrorKind::Segmentation, "polynomial division left no quotient (noise too large for basic GPCA)");
  return {basis.degree - 1, basis.D, trailing_rows(s, nullity)};
}

void assign(const Eigen::MatrixXd& points, SegmentationResult& result) {
  const auto N = points.rows();
  result.labels.assign(static_cast<std::size_t>(N), 0);
  result.residuals.assign(static_cast<std::size_t>(N), 0.0);
  for (Eigen::Index i = 0; i < N; ++i) {
    const Eigen::VectorXd y = points.row(i).transpose();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < result.models.size(); ++j) {
      const double d = result.models[j].distance(y);
      if (d < best) {
        best = d;
        result.labels[static_cast<std::size_t>(i)] = static_cast<int>(j);
      }
    }
    result.residuals[static_cast<std::size_t>(i)] = best;
  }
}

namespace {

void finish(const PointCloud& cloud, SegmentationResult& result) {
  assign(cloud.points, result);
  result.source_ids = cloud.source_ids;
  if (cloud.labels) result.misclassified = segmentation_error(result.labels, *cloud.labels);
  if (!result.residuals.empty()) {
    result.diagnostics["max_residual"] = *std::max_element(result.residuals.begin(), result.residuals.end());
    result.diagnostics["mean_residual"] =
        std::accumulate(result.residuals.begin(), result.residuals.end(), 0.0) / result.residuals.size();
  }
}

std::vector<int> codims_from_dims(int D, const std::vector<int>& dims) {
  std::vector<int> codims;
  for (int d : dims) {
    if (d < 1 || d > D - 1)
      fail(ErrorKind::Input, "subspace dimension " + std::to_string(d) + " outside [1, " + std::to_string(D - 1) + "]");
    codims.push_back(D - d);
  }
  return codims;
}

}  // namespace

SegmentationResult segment_basic(const PointCloud& cloud, int n, const std::optional<std::vector<int>>& dims,
                                 double eps_rank) {
  cloud.validate();
  if (n < 1) fail(ErrorKind::Input, "subspace count n must be at least 1");
  const int D = static_cast<int>(cloud.dim());
  std::vector<int> unused;
  int h = 0;
  if (dims) {
    if (static_cast<int>(dims->size()) != n)
      fail(ErrorKind::Input, "expected " + std::to_string(n) + " subspace dimensions, got " + std::to_string(dims->size()));
    unused = codims_from_dims(D, *dims);
    h = generic_hilbert_function(D, unused);
  }

  SegmentationResult result;
  PolynomialBasis basis = fit_vanishing_polynomials(cloud, n, h, eps_rank);
  result.diagnostics["h"] = static_cast<double>(basis.h());
  std::set<int> exclude;
  const double on_subspace = 1e-8 * std::max(max_norm(cloud.points), 1.0);
  for (int j = 0; j < n; ++j) {
    const int w = select_representative(cloud, basis, exclude, eps_rank);
    const Eigen::VectorXd y = cloud.points.row(w).transpose();
    std::optional<int> codim;
    if (!unused.empty()) {
      const int rank = subspace_from_point(basis, y, std::nullopt, eps_rank).codim();
      const auto nearest = std::min_element(unused.begin(), unused.end(),
                                            [&](int a, int b) { return std::abs(a - rank) < std::abs(b - rank); });
      codim = *nearest;
      unused.erase(nearest);
    }
    result.models.push_back(subspace_from_point(basis, y, codim, eps_rank));
    for (Eigen::Index i = 0; i < cloud.size(); ++i)
      if (result.models.back().distance(cloud.points.row(i).transpose()) <= on_subspace) exclude.insert(static_cast<int>(i));
    if (j + 1 == n) break;
    // The quotient only has to vanish on what is left; points already placed
    // on an extracted subspace would otherwise veto it.
    std::vector<int> rest;
    for (int i = 0; i < static_cast<int>(cloud.size()); ++i)
      if (!exclude.count(i)) rest.push_back(i);
    if (rest.empty()) fail(ErrorKind::Segmentation, "no points left for the remaining subspaces");
    basis = divide_out(basis, result.models.back(), cloud.select(rest), eps_rank);
  }
  finish(cloud, result);
  return result;
}

SegmentationResult segment_voting(const PointCloud& cloud, int n, const std::vector<int>& codims,
                                  const VotingOptions& opts) {
  cloud.validate();
  if (n < 1) fail(ErrorKind::Input, "subspace count n must be at least 1");
  const int D = static_cast<int>(cloud.dim());
  if (static_cast<int>(codims.size()) != n)
    fail(ErrorKind::Input, "expected " + std::to_string(n) + " codimensions, got " + std::to_string(codims.size()));
  for (int c : codims)
    if (c < 1 || c > D - 1)
      fail(ErrorKind::Input, "codimension " + std::to_string(c) + " outside [1, " + std::to_string(D - 1) + "]");
  if (!(opts.tau >= 0.0)) fail(ErrorKind::Input, "tau must be nonnegative");

  std::map<int, int> multiplicity;
  for (int c : codims) ++multiplicity[c];

  const int h = opts.h > 0 ? opts.h : generic_hilbert_function(D, codims);
  const PolynomialBasis basis = fit_vanishing_polynomials(cloud, n, h, opts.eps_rank);

  std::vector<Candidate> candidates;
  int skipped = 0;
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const Eigen::MatrixXd G = evaluate_gradients(basis, cloud.points.row(i).transpose());
    if (!(G.colwise().norm().maxCoeff() > opts.eps_grad)) {
      ++skipped;
      continue;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeFullU);
    for (const auto& [c, mult] : multiplicity) {
      const Eigen::MatrixXd B = svd.matrixU().leftCols(c);
      Candidate* closest = nullptr;
      double closest_angle = std::numeric_limits<double>::infinity();
      for (auto& cand : candidates) {
        if (cand.codim != c) continue;
        const double a = subspace_angle(B, cand.mean);
        if (a < closest_angle) {
          closest_angle = a;
          closest = &cand;
        }
      }
      if (closest && closest_angle < opts.tau) {
        closest->projector_sum += B * B.transpose();
        ++closest->votes;
        closest->mean = leading_eigenvectors(closest->projector_sum, c);
      } else {
        candidates.push_back({c, 1, static_cast<int>(candidates.size()), B * B.transpose(), B});
      }
    }
  }
  if (skipped == cloud.size()) fail(ErrorKind::Segmentation, "all gradients vanish");

  SegmentationResult result;
  std::vector<const Candidate*> chosen;
  for (const auto& [c, mult] : multiplicity) {
    std::vector<const Candidate*> pool;
    for (const auto& cand : candidates)
      if (cand.codim == c && cand.votes >= 2) pool.push_back(&cand);
    std::sort(pool.begin(), pool.end(), [](const Candidate* a, const Candidate* b) {
      return a->votes != b->votes ? a->votes > b->votes : a->order < b->order;
    });
    if (static_cast<int>(pool.size()) < mult)
      fail(ErrorKind::Segmentation, "fewer than n clusters: codimension " + std::to_string(c) + " needs " +
                                        std::to_string(mult) + ", found " + std::to_string(pool.size()));
    chosen.insert(chosen.end(), pool.begin(), pool.begin() + mult);
  }
  std::stable_sort(chosen.begin(), chosen.end(), [](const Candidate* a, const Candidate* b) {
    return a->votes != b->votes ? a->votes > b->votes : a->order < b->order;
  });
  for (const Candidate* cand : chosen) {
    result.models.push_back(model_from_complement(cand->mean));
    result.votes.push_back(cand->votes);
  }
  for (const auto& cand : candidates) result.candidate_votes.push_back(cand.votes);
  std::sort(result.candidate_votes.rbegin(), result.candidate_votes.rend());

  result.diagnostics["h"] = h;
  result.diagnostics["candidates"] = static_cast<double>(candidates.size());
  result.diagnostics["zero_gradient_points"] = skipped;
  finish(cloud, result);
  return result;
}

double subspace_angle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    fail(ErrorKind::Input, "subspace_angle needs bases of equal shape");
  if (A.cols() == 0) return 0.0;
  // cos θ_max is the smallest singular value of AᵀB and sin θ_max the largest
  // of (I − AAᵀ)B; atan2 keeps precision at both ends.
  const Eigen::VectorXd cosines = Eigen::JacobiSVD<Eigen::MatrixXd>(A.transpose() * B).singularValues();
  const Eigen::VectorXd sines = Eigen::JacobiSVD<Eigen::MatrixXd>(B - A * (A.transpose() * B)).singularValues();
  const double c = std::clamp(cosines.minCoeff(), 0.0, 1.0);
  const double s = std::clamp(sines.maxCoeff(), 0.0, 1.0);
  return std::clamp(std::atan2(s, c), 0.0, M_PI / 2);
}

namespace {

// Best bijection between the two label alphabets: for every position, whether
// the predicted label maps onto the true one.
std::vector<bool> matched(const std::vector<int>& labels, const std::vector<int>& truth) {
  if (labels.size() != truth.size())
    fail(ErrorKind::Input, "label vectors differ in length: " + std::to_string(labels.size()) + " vs " +
                               std::to_string(truth.size()));
  std::map<int, int> pred_ids, truth_ids;
  for (int l : labels) pred_ids.emplace(l, static_cast<int>(pred_ids.size()));
  for (int t : truth) truth_ids.emplace(t, static_cast<int>(truth_ids.size()));
  const int k = static_cast<int>(std::max(pred_ids.size(), truth_ids.size()));
  if (k > 8) fail(ErrorKind::Input, "segmentation_error supports at most 8 classes");
  std::vector<std::vector<int>> confusion(static_cast<std::size_t>(k), std::vector<int>(static_cast<std::size_t>(k), 0));
  for (std::size_t i = 0; i < labels.size(); ++i)
    ++confusion[static_cast<std::size_t>(pred_ids[labels[i]])][static_cast<std::size_t>(truth_ids[truth[i]])];
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best_perm = perm;
  int best = -1;
  do {
    int hits = 0;
    for (int p = 0; p < k; ++p) hits += confusion[static_cast<std::size_t>(p)][static_cast<std::size_t>(perm[static_cast<std::size_t>(p)])];
    if (hits > best) {
      best = hits;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::vector<bool> ok(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    ok[i] = best_perm[static_cast<std::size_t>(pred_ids[labels[i]])] == truth_ids[truth[i]];
  return ok;
}

}  // namespace

int segmentation_error(const std::vector<int>& labels, const std::vector<int>& truth) {
  const auto ok = matched(labels, truth);
  return static_cast<int>(std::count(ok.begin(), ok.end(), false));
}

std::vector<bool> misclassified_points(const std::vector<int>& labels, const std::vector<int>& truth) {
  auto ok = matched(labels, truth);
  ok.flip();
  return ok;
}

int generic_hilbert_function(int D, const std::vector<int>& codims) {
  if (codims.empty()) fail(ErrorKind::Input, "no subspaces given");
  for (int c : codims)
    if (c < 1 || c > D - 1)
      fail(ErrorKind::Input, "codimension " + std::to_string(c) + " outside [1, " + std::to_string(D - 1) + "]");
  const int n = static_cast<int>(codims.size());
  const auto M = veronese::monomial_count(D, n);
  // A fixed seed keeps the result reproducible; any generic draw gives the
  // same rank.
  std::mt19937_64 rng(0x6a09e667f3bcc908ULL);
  std::normal_distribution<double> gauss;
  const auto draw = [&](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd A(r, c);
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = gauss(rng);
    return A;
  };
  Eigen::MatrixXd samples(M * n, D);
  for (int j = 0; j < n; ++j) {
    const int d = D - codims[static_cast<std::size_t>(j)];
    const Eigen::MatrixXd basis = Eigen::HouseholderQR<Eigen::MatrixXd>(draw(D, d)).householderQ() *
                                  Eigen::MatrixXd::Identity(D, d);
    samples.middleRows(j * M, M) = draw(M, d) * basis.transpose();
  }
  const Eigen::MatrixXd Vn = veronese::embedded_data_matrix(samples, n);
  const RightSvd s = right_svd(Vn);
  return static_cast<int>(count_below(s.sigma, 1e-10));
}

}  // namespace mvugpca::gpca
