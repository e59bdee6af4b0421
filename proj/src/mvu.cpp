// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#include "mvugpca/mvu.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Sparse>

#include "mvugpca/kernels.hpp"

namespace mvugpca::mvu {

namespace {

// Working form of the program, with targets divided by max D_ij:
//   min <C, X>  s.t.  A(X) = b,  X ⪰ 0,  C = −I.
// Rows of A are the edge matrices (e_i − e_j)(e_i − e_j)ᵀ followed by the
// centering matrix 11ᵀ/N, which has unit Frobenius norm and is orthogonal to
// every edge matrix.
class ConstraintOperator {
 public:
  ConstraintOperator(const SdpProblem& p, double scale) : n_(p.n), edges_(p.constraints) {
    b_.resize(static_cast<Eigen::Index>(edges_.size()) + 1);
    for (std::size_t e = 0; e < edges_.size(); ++e) b_(static_cast<Eigen::Index>(e)) = edges_[e].target / scale;
    b_(b_.size() - 1) = 0.0;
    factor_gram();
  }

  Eigen::Index rows() const { return b_.size(); }
  const Eigen::VectorXd& b() const { return b_; }

  Eigen::VectorXd apply(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out(rows());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const int i = edges_[e].i, j = edges_[e].j;
      out(static_cast<Eigen::Index>(e)) = X(i, i) + X(j, j) - X(i, j) - X(j, i);
    }
    out(rows() - 1) = X.sum() / n_;
    return out;
  }

  Eigen::MatrixXd adjoint(const Eigen::VectorXd& y) const {
    Eigen::MatrixXd M = Eigen::MatrixXd::Constant(n_, n_, y(rows() - 1) / n_);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const int i = edges_[e].i, j = edges_[e].j;
      const double v = y(static_cast<Eigen::Index>(e));
      M(i, i) += v;
      M(j, j) += v;
      M(i, j) -= v;
      M(j, i) -= v;
    }
    return M;
  }

  Eigen::VectorXd solve_gram(const Eigen::VectorXd& rhs) const { return ldlt_.solve(rhs); }

  // Matrix of a_eᵀ W a_f over all constraint pairs, W symmetric. The edge
  // vectors are e_i − e_j and the centering vector is 1/√N.
  Eigen::MatrixXd congruence(const Eigen::MatrixXd& W) const {
    const auto m = static_cast<Eigen::Index>(edges_.size());
    Eigen::MatrixXd G(m + 1, m + 1);
    for (Eigen::Index e = 0; e < m; ++e) {
      const int i = edges_[static_cast<std::size_t>(e)].i, j = edges_[static_cast<std::size_t>(e)].j;
      for (Eigen::Index f = e; f < m; ++f) {
        const int k = edges_[static_cast<std::size_t>(f)].i, l = edges_[static_cast<std::size_t>(f)].j;
        const double v = W(i, k) - W(i, l) - W(j, k) + W(j, l);
        G(e, f) = v;
        G(f, e) = v;
      }
    }
    const Eigen::VectorXd r = W.rowwise().sum();
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n_));
    for (Eigen::Index e = 0; e < m; ++e) {
      const int i = edges_[static_cast<std::size_t>(e)].i, j = edges_[static_cast<std::size_t>(e)].j;
      G(e, m) = G(m, e) = (r(i) - r(j)) * inv_sqrt_n;
    }
    G(m, m) = W.sum() / n_;
    return G;
  }

 private:
  // <E_e, E_f> = ((e_i − e_j)·(e_k − e_l))²: 4 on the diagonal, 1 for edges
  // sharing a vertex, 0 otherwise.
  void factor_gram() {
    const auto m = static_cast<int>(edges_.size());
    std::vector<std::vector<int>> incident(static_cast<std::size_t>(n_));
    for (int e = 0; e < m; ++e) {
      incident[static_cast<std::size_t>(edges_[static_cast<std::size_t>(e)].i)].push_back(e);
      incident[static_cast<std::size_t>(edges_[static_cast<std::size_t>(e)].j)].push_back(e);
    }
    std::vector<Eigen::Triplet<double>> trip;
    for (int e = 0; e < m; ++e) trip.emplace_back(e, e, 4.0);
    for (const auto& inc : incident)
      for (std::size_t a = 0; a < inc.size(); ++a)
        for (std::size_t c = a + 1; c < inc.size(); ++c) {
          trip.emplace_back(inc[a], inc[c], 1.0);
          trip.emplace_back(inc[c], inc[a], 1.0);
        }
    trip.emplace_back(m, m, 1.0);
    Eigen::SparseMatrix<double> G(m + 1, m + 1);
    G.setFromTriplets(trip.begin(), trip.end());
    ldlt_.compute(G);
    if (ldlt_.info() != Eigen::Success) fail(ErrorKind::Solver, "constraint Gram matrix is singular");
  }

  int n_;
  const std::vector<DistanceConstraint>& edges_;
  Eigen::VectorXd b_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

double max_target(const SdpProblem& p) {
  double m = 0.0;
  for (const auto& c : p.constraints) m = std::max(m, c.target);
  return m;
}

// Relative distance violation; edges shorter than 1e-6·max D are measured
// against that floor so coincident points do not demand exact zeros.
// max |d_ij(K) − D_ij| / max(D_ij, 1) in the caller's units; K may be
// expressed in units of `scale` (targets divided by it).
double relative_violation(const SdpProblem& p, const Eigen::MatrixXd& K, double scale) {
  double worst = 0.0;
  for (const auto& c : p.constraints) {
    const double got = K(c.i, c.i) + K(c.j, c.j) - K(c.i, c.j) - K(c.j, c.i);
    const double err = std::abs(got * scale - c.target);
    worst = std::max(worst, err / std::max(c.target, 1.0));
  }
  return worst;
}

Eigen::MatrixXd double_center(const Eigen::MatrixXd& X) {
  const Eigen::RowVectorXd col_mean = X.colwise().mean();
  Eigen::MatrixXd Y = X.rowwise() - col_mean;
  const Eigen::VectorXd row_mean = Y.rowwise().mean();
  Y.colwise() -= row_mean;
  return 0.5 * (Y + Y.transpose());
}

GramSolution finalize(const SdpProblem& p, const Eigen::MatrixXd& X, int iterations, double dual_residual) {
  GramSolution s;
  s.K = double_center(X);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.K);
  if (eig.info() != Eigen::Success) fail(ErrorKind::Solver, "eigendecomposition of K failed");
  s.eigenvalues = eig.eigenvalues().reverse();
  s.eigenvectors = eig.eigenvectors().rowwise().reverse();
  s.objective = s.K.trace();
  s.primal_residual = primal_residual(p, s.K);
  s.centering_residual = centering_residual(s.K);
  s.min_eigenvalue = s.eigenvalues(s.eigenvalues.size() - 1);
  s.dual_residual = dual_residual;
  s.iterations = iterations;
  return s;
}

std::optional<GramSolution> try_complete_graph(const SdpProblem& p, const SolverOptions& opts) {
  const long pairs = static_cast<long>(p.n) * (p.n - 1) / 2;
  if (!opts.exact_complete_graph || static_cast<long>(p.constraints.size()) != pairs) return std::nullopt;
  // Classical scaling: K = −½·J·D·J.
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(p.n, p.n);
  for (const auto& c : p.constraints) {
    D(c.i, c.j) = c.target;
    D(c.j, c.i) = c.target;
  }
  GramSolution s = finalize(p, -0.5 * D, 0, 0.0);
  s.converged = true;
  if (s.min_eigenvalue < -opts.tol_psd * std::max(s.eigenvalues(0), 0.0)) return std::nullopt;
  return s;
}

void check_problem(const SdpProblem& p) {
  if (p.n < 1) fail(ErrorKind::Solver, "empty problem");
  if (p.constraints.empty()) fail(ErrorKind::Graph, "unbounded program: no distance constraints");
  for (const auto& c : p.constraints)
    if (c.i == c.j || c.i < 0 || c.j < 0 || c.i >= p.n || c.j >= p.n || !(c.target >= 0.0))
      fail(ErrorKind::Solver, "malformed distance constraint");
}

// Largest α with X + αΔX ⪰ 0 (infinity when ΔX keeps X in the cone).
double max_step(const Eigen::LLT<Eigen::MatrixXd>& chol, const Eigen::MatrixXd& dX) {
  const auto& L = chol.matrixL();
  Eigen::MatrixXd W = L.solve(dX);
  W = L.solve(W.transpose()).transpose();
  W = 0.5 * (W + W.transpose());
  const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(W, Eigen::EigenvaluesOnly).eigenvalues()(0);
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

Eigen::MatrixXd sym(const Eigen::MatrixXd& W) { return 0.5 * (W + W.transpose()); }

// Every feasible K lies in a face of the PSD cone that the distances alone
// determine. For a constrained clique C, any affine dependency z of its points
// (Σz = 0) has zᵀKz = −½·zᵀD_C z = 0, hence Kz = 0. The returned columns are an
// orthonormal basis of the complement of 1 and all such z. Without this, data
// whose cliques are affinely degenerate (k ≥ 3 on a 3-D curve, say) leaves
// the program with no strictly feasible point and interior-point steps stall.
Eigen::MatrixXd feasible_face(const SdpProblem& p) {
  const int n = p.n;
  Eigen::MatrixXd D = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& c : p.constraints) {
    D(c.i, c.j) = D(c.j, c.i) = c.target;
    adj[static_cast<std::size_t>(c.i)].push_back(c.j);
    adj[static_cast<std::size_t>(c.j)].push_back(c.i);
  }
  D.diagonal().setZero();

  std::vector<Eigen::VectorXd> nulls{Eigen::VectorXd::Ones(n)};
  std::set<std::vector<int>> seen;
  for (int v = 0; v < n; ++v) {
    auto nb = adj[static_cast<std::size_t>(v)];
    std::sort(nb.begin(), nb.end());
    std::vector<int> clique{v};
    for (int u : nb)
      if (std::all_of(clique.begin(), clique.end(), [&](int w) { return !std::isnan(D(u, w)); }))
        clique.push_back(u);
    std::sort(clique.begin(), clique.end());
    if (clique.size() < 2 || !seen.insert(clique).second) continue;

    const auto c = static_cast<Eigen::Index>(clique.size());
    Eigen::MatrixXd Dc(c, c);
    for (Eigen::Index a = 0; a < c; ++a)
      for (Eigen::Index b = 0; b < c; ++b) Dc(a, b) = D(clique[static_cast<std::size_t>(a)], clique[static_cast<std::size_t>(b)]);
    const Eigen::MatrixXd J = Eigen::MatrixXd::Identity(c, c) - Eigen::MatrixXd::Constant(c, c, 1.0 / c);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(-0.5 * J * Dc * J);
    const double top = eig.eigenvalues()(c - 1);
    for (Eigen::Index a = 0; a < c; ++a) {
      if (eig.eigenvalues()(a) > 1e-13 * top) break;
      Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
      const Eigen::VectorXd w = eig.eigenvectors().col(a).array() - eig.eigenvectors().col(a).mean();
      if (w.norm() < 1e-8) continue;  // the constant direction
      for (Eigen::Index b = 0; b < c; ++b) z(clique[static_cast<std::size_t>(b)]) = w(b);
      nulls.push_back(z);
    }
  }

  Eigen::MatrixXd Zs(n, static_cast<Eigen::Index>(nulls.size()));
  for (std::size_t q = 0; q < nulls.size(); ++q) Zs.col(static_cast<Eigen::Index>(q)) = nulls[q].normalized();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Zs);
  qr.setThreshold(1e-10);
  const Eigen::Index fixed = qr.rank();
  const Eigen::MatrixXd full = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return full.rightCols(n - fixed);
}

// Indices of a maximal linearly independent subset of the rank-one constraint
// matrices v_e v_eᵀ, found from their Gram matrix (VᵀV)∘(VᵀV).
std::vector<Eigen::Index> independent_constraints(const Eigen::MatrixXd& V) {
  const Eigen::MatrixXd inner = V.transpose() * V;
  const Eigen::MatrixXd G = inner.cwiseProduct(inner);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(G);
  qr.setThreshold(1e-15);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index q = 0; q < qr.rank(); ++q) keep.push_back(qr.colsPermutation().indices()(q));
  std::sort(keep.begin(), keep.end());
  return keep;
}

// Minimum-norm Gauss-Newton on K = YYᵀ: moves the rows of Y as little as
// possible to satisfy the distance constraints. K stays PSD and, since every
// update sums to zero over the rows, centered. Returns K unchanged when the
// iteration makes things worse.
Eigen::MatrixXd polish(const SdpProblem& p, const Eigen::MatrixXd& K0) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym(K0));
  const Eigen::VectorXd lam = eig.eigenvalues();
  const double top = lam.maxCoeff();
  if (!(top > 0.0)) return K0;
  Eigen::Index rank = 0;
  for (Eigen::Index q = 0; q < lam.size(); ++q) rank += lam(q) > 1e-15 * top;
  Eigen::MatrixXd Y = eig.eigenvectors().rightCols(rank) * lam.tail(rank).cwiseSqrt().asDiagonal();

  const auto m = static_cast<Eigen::Index>(p.constraints.size());
  std::vector<std::vector<Eigen::Index>> incident(static_cast<std::size_t>(p.n));
  for (Eigen::Index e = 0; e < m; ++e) {
    incident[static_cast<std::size_t>(p.constraints[static_cast<std::size_t>(e)].i)].push_back(e);
    incident[static_cast<std::size_t>(p.constraints[static_cast<std::size_t>(e)].j)].push_back(e);
  }
  const auto violation = [&](const Eigen::MatrixXd& Yc) {
    return relative_violation(p, Yc * Yc.transpose(), 1.0);
  };

  double best = violation(Y);
  const double start = best;
  Eigen::MatrixXd best_Y = Y;
  for (int sweep = 0; sweep < 20 && best > 1e-14; ++sweep) {
    Eigen::MatrixXd d(m, rank);
    Eigen::VectorXd res(m);
    for (Eigen::Index e = 0; e < m; ++e) {
      const auto& c = p.constraints[static_cast<std::size_t>(e)];
      d.row(e) = Y.row(c.i) - Y.row(c.j);
      res(e) = d.row(e).squaredNorm() - c.target;
    }
    // JJᵀ(e, f) = 4·(d_e·d_f)·((e_i − e_j)·(e_k − e_l)).
    Eigen::MatrixXd JJ = Eigen::MatrixXd::Zero(m, m);
    for (int v = 0; v < p.n; ++v) {
      for (Eigen::Index e : incident[static_cast<std::size_t>(v)]) {
        const double se = p.constraints[static_cast<std::size_t>(e)].i == v ? 1.0 : -1.0;
        for (Eigen::Index f : incident[static_cast<std::size_t>(v)]) {
          const double sf = p.constraints[static_cast<std::size_t>(f)].i == v ? 1.0 : -1.0;
          JJ(e, f) += 4.0 * se * sf * d.row(e).dot(d.row(f));
        }
      }
    }
    JJ.diagonal().array() += 1e-14 * JJ.diagonal().maxCoeff();
    const Eigen::VectorXd w = JJ.ldlt().solve(res);
    Eigen::MatrixXd step = Eigen::MatrixXd::Zero(p.n, rank);
    for (Eigen::Index e = 0; e < m; ++e) {
      const auto& c = p.constraints[static_cast<std::size_t>(e)];
      step.row(c.i) -= 2.0 * w(e) * d.row(e);
      step.row(c.j) += 2.0 * w(e) * d.row(e);
    }
    // Dependent constraints make JJᵀ nearly singular; halve until it helps.
    bool improved = false;
    for (double t = 1.0; t > 1e-6 && !improved; t *= 0.5) {
      const Eigen::MatrixXd trial = Y + t * step;
      const double now = violation(trial);
      if (now < best) {
        best = now;
        Y = trial;
        improved = true;
      }
    }
    if (!improved) break;
    best_Y = Y;
  }
  return best < start ? Eigen::MatrixXd(best_Y * best_Y.transpose()) : K0;
}

std::string residual_report(const IterationRecord& r) {
  std::ostringstream os;
  os << std::setprecision(3) << "primal residual " << r.primal_residual << ", dual residual " << r.dual_residual
     << ", centering residual " << r.centering_residual << ", objective " << std::setprecision(10) << r.objective;
  return os.str();
}

}  // namespace

SdpProblem assemble(const graph::NeighborGraph& g) {
  const auto& edges = g.edges_gprime.empty() ? g.edges_g : g.edges_gprime;
  if (edges.empty()) fail(ErrorKind::Graph, "unbounded program: the neighbor graph has no edges");
  SdpProblem p;
  p.n = g.n_vertices;
  p.constraints.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.i == e.j) fail(ErrorKind::Graph, "self-loop in neighbor graph");
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) fail(ErrorKind::Graph, "invalid edge weight");
    p.constraints.push_back({e.i, e.j, e.weight});
  }
  return p;
}

double primal_residual(const SdpProblem& problem, const Eigen::MatrixXd& K) {
  return relative_violation(problem, K, 1.0);
}

double centering_residual(const Eigen::MatrixXd& K) {
  const double tr = K.trace();
  const double n = static_cast<double>(K.rows());
  if (tr <= 0.0) return std::abs(K.sum()) > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return std::abs(K.sum()) / (n * tr);
}

Eigen::MatrixXd centered_gram(const Eigen::MatrixXd& points) {
  const Eigen::MatrixXd c = points.rowwise() - points.colwise().mean();
  return kernels::gram(c);
}

GramSolution AugmentedLagrangianSolver::solve(const SdpProblem& p, const SolverOptions& opts) const {
  check_problem(p);

  if (auto exact = try_complete_graph(p, opts)) return *exact;

  const int max_iter = opts.max_iter > 0 ? opts.max_iter : 20000;
  const int n = p.n;
  const double scale = max_target(p) > 0.0 ? max_target(p) : 1.0;
  const ConstraintOperator A(p, scale);
  const Eigen::VectorXd& b = A.b();
  const double b_norm = b.norm();
  const Eigen::MatrixXd C = -Eigen::MatrixXd::Identity(n, n);
  const double c_norm = std::sqrt(static_cast<double>(n));

  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, n);
  if (opts.initial) {
    if (opts.initial->rows() != n || opts.initial->cols() != n)
      fail(ErrorKind::Solver, "initial Gram matrix has the wrong order");
    X = *opts.initial / scale;
  }
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  double mu = opts.penalty_init;

  std::optional<Eigen::MatrixXd> best;
  double best_obj = -std::numeric_limits<double>::infinity();
  std::deque<double> history;
  int primal_heavy = 0, dual_heavy = 0;
  IterationRecord rec;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(n);

  auto consider = [&](const Eigen::MatrixXd& Xc, double pinf) {
    if (pinf > opts.tol_feas) return;
    const double obj = Xc.trace() - Xc.sum() / n;  // trace after exact centering
    if (obj > best_obj) {
      best_obj = obj;
      best = Xc;
    }
  };
  if (opts.initial) consider(X, relative_violation(p, X, scale));

  for (int it = 1; it <= max_iter; ++it) {
    // Multiplier step: (AA*) y = −(μ(A(X) − b) + A(S − C)).
    const Eigen::VectorXd rhs = -(mu * (A.apply(X) - b) + A.apply(S - C));
    const Eigen::VectorXd y = A.solve_gram(rhs);
    const Eigen::MatrixXd V = C - A.adjoint(y) - mu * X;

    eig.compute(V);
    if (eig.info() != Eigen::Success) fail(ErrorKind::Solver, "eigendecomposition failed in iteration " + std::to_string(it));
    const Eigen::VectorXd lam = eig.eigenvalues();
    const Eigen::MatrixXd& Q = eig.eigenvectors();
    S = Q * lam.cwiseMax(0.0).asDiagonal() * Q.transpose();
    X = Q * (-lam).cwiseMax(0.0).asDiagonal() * Q.transpose() / mu;

    const Eigen::VectorXd ax = A.apply(X);
    const double pinf_norm = (ax - b).norm() / (1.0 + b_norm);
    const double dinf = (C - A.adjoint(y) - S).norm() / (1.0 + c_norm);
    const double pinf = relative_violation(p, X, scale);
    const double cres = centering_residual(X);
    const double obj = X.trace() * scale;

    rec = {it, obj, pinf, dinf, cres, mu};
    if (opts.trace) opts.trace(rec);
    consider(X, pinf);

    history.push_back(obj);
    if (static_cast<int>(history.size()) > opts.objective_window + 1) history.pop_front();
    const bool stalled = static_cast<int>(history.size()) == opts.objective_window + 1 &&
                         std::abs(history.back() - history.front()) <=
                             opts.tol_objective * std::max(std::abs(history.back()), 1e-300);

    if (pinf <= opts.tol_feas && cres <= opts.tol_feas && dinf <= opts.tol_dual && stalled) {
      GramSolution s = finalize(p, *best * scale, it, dinf);
      s.converged = true;
      return s;
    }

    // Keep primal and dual residuals within a factor of ten of each other.
    if (pinf_norm > 10.0 * dinf) {
      ++primal_heavy;
      dual_heavy = 0;
    } else if (dinf > 10.0 * pinf_norm) {
      ++dual_heavy;
      primal_heavy = 0;
    } else {
      primal_heavy = dual_heavy = 0;
    }
    if (primal_heavy >= opts.penalty_patience) {
      mu = std::min(mu * opts.penalty_factor, opts.penalty_max);
      primal_heavy = 0;
    } else if (dual_heavy >= opts.penalty_patience) {
      mu = std::max(mu / opts.penalty_factor, opts.penalty_min);
      dual_heavy = 0;
    }
  }

  if (!best) throw SolverError("max_iter reached without feasibility: " + residual_report(rec), rec);
  // Feasible but not certified optimal: hand back the best feasible iterate.
  return finalize(p, *best * scale, max_iter, rec.dual_residual);
}

GramSolution InteriorPointSolver::solve(const SdpProblem& p, const SolverOptions& opts) const {
  check_problem(p);
  if (auto exact = try_complete_graph(p, opts)) return *exact;

  const int max_iter = opts.max_iter > 0 ? opts.max_iter : 100;
  const int n = p.n;
  const double scale = max_target(p) > 0.0 ? max_target(p) : 1.0;

  // Work inside the face that holds every feasible K: K = Q X Qᵀ. Its
  // columns are orthogonal to 1, so centering holds exactly.
  const Eigen::MatrixXd Q = feasible_face(p);
  const auto r = static_cast<int>(Q.cols());
  if (r == 0) {
    const Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    if (relative_violation(p, K, 1.0) > opts.tol_feas) fail(ErrorKind::Solver, "numerically infeasible constraint set");
    GramSolution s = finalize(p, K, 0, 0.0);
    s.converged = true;
    return s;
  }
  Eigen::MatrixXd V_all(r, static_cast<Eigen::Index>(p.constraints.size()));
  for (std::size_t e = 0; e < p.constraints.size(); ++e) {
    const auto& c = p.constraints[e];
    V_all.col(static_cast<Eigen::Index>(e)) = (Q.row(c.i) - Q.row(c.j)).transpose();
  }
  // Inside the face some distances are implied by others; drop them so the
  // Schur complement stays nonsingular.
  const auto keep = independent_constraints(V_all);
  const auto m = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd V(r, m);  // constraint e is the rank-one matrix v_e v_eᵀ
  Eigen::VectorXd b(m);
  for (Eigen::Index e = 0; e < m; ++e) {
    V.col(e) = V_all.col(keep[static_cast<std::size_t>(e)]);
    b(e) = p.constraints[static_cast<std::size_t>(keep[static_cast<std::size_t>(e)])].target / scale;
  }
  const auto apply = [&](const Eigen::MatrixXd& W) -> Eigen::VectorXd {
    return V.cwiseProduct(W * V).colwise().sum().transpose();
  };
  const auto adjoint = [&](const Eigen::VectorXd& y) -> Eigen::MatrixXd {
    return V * y.asDiagonal() * V.transpose();
  };
  const auto lift = [&](const Eigen::MatrixXd& X) -> Eigen::MatrixXd { return Q * X * Q.transpose(); };

  const double b_norm = b.norm();
  const double c_norm = std::sqrt(static_cast<double>(r));
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(r, r);

  // Scaled targets lie in [0, 1]; a unit-spaced chain of N points has trace
  // of order N³, so start well inside the cone on both sides.
  const double xi = std::max(10.0, static_cast<double>(n));
  const double eta = std::max(10.0, std::sqrt(static_cast<double>(n)));
  Eigen::MatrixXd X = xi * I;
  Eigen::MatrixXd Z = eta * I;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

  IterationRecord rec;
  bool optimal = false;
  int iterations = 0;
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd rp = b - apply(X);
    const Eigen::MatrixXd Rd = -I - adjoint(y) - Z;
    const double mu = X.cwiseProduct(Z).sum() / r;
    const double pobj = -X.trace();
    const double dobj = b.dot(y);
    const double rel_p = rp.norm() / (1.0 + b_norm);
    const double rel_d = Rd.norm() / (1.0 + c_norm);
    // Complementarity rather than pobj − dobj: on thin feasible sets the
    // multipliers grow without bound and yᵀr_p swamps the difference.
    const double gap = X.cwiseProduct(Z).sum() / (1.0 + std::abs(pobj) + std::abs(dobj));
    const Eigen::MatrixXd K = lift(X);

    rec = {it - 1, X.trace() * scale, relative_violation(p, K, scale), rel_d, centering_residual(K), mu};
    if (opts.trace) opts.trace(rec);
    iterations = it - 1;
    optimal = gap <= opts.tol_gap && rel_d <= opts.tol_dual;
    if (optimal && rel_p <= opts.tol_feas) break;

    // Close to a low-rank optimum the factorizations give out before the
    // last digits of feasibility arrive; the polish below supplies those.
    Eigen::LLT<Eigen::MatrixXd> zchol(Z);
    Eigen::LLT<Eigen::MatrixXd> xchol(X);
    if (zchol.info() != Eigen::Success || xchol.info() != Eigen::Success) break;
    const Eigen::MatrixXd Zi = zchol.solve(I);

    // Schur complement of the HKM direction: (VᵀZ⁻¹V)∘(VᵀXV).
    const Eigen::MatrixXd M = (V.transpose() * Zi * V).cwiseProduct(V.transpose() * X * V);
    Eigen::LLT<Eigen::MatrixXd> mchol(M);
    for (double shift = 1e-14 * M.diagonal().maxCoeff(); mchol.info() != Eigen::Success; shift *= 100.0) {
      if (shift > 1e-6 * M.diagonal().maxCoeff()) break;
      mchol.compute(M + shift * Eigen::MatrixXd::Identity(m, m));
    }
    if (mchol.info() != Eigen::Success) break;

    const Eigen::VectorXd ZiRdX = apply(Zi * Rd * X);
    auto direction = [&](const Eigen::MatrixXd& Rc, Eigen::MatrixXd& dX, Eigen::VectorXd& dy, Eigen::MatrixXd& dZ) {
      dy = mchol.solve(rp - apply(Rc) + ZiRdX);
      dZ = Rd - adjoint(dy);
      dX = sym(Rc - Zi * dZ * X);
    };

    Eigen::MatrixXd dX, dZ;
    Eigen::VectorXd dy;
    direction(-X, dX, dy, dZ);
    const double ap_aff = std::min(1.0, max_step(xchol, dX));
    const double ad_aff = std::min(1.0, max_step(zchol, dZ));
    const double mu_aff = (X + ap_aff * dX).cwiseProduct(Z + ad_aff * dZ).sum() / r;
    const double sigma = std::min(1.0, std::pow(mu_aff / mu, 3.0));

    direction(sigma * mu * Zi - X - Zi * dZ * dX, dX, dy, dZ);
    const double gamma = 0.9 + 0.09 * std::min(ap_aff, ad_aff);
    const double ap = std::min(1.0, gamma * max_step(xchol, dX));
    const double ad = std::min(1.0, gamma * max_step(zchol, dZ));
    if (std::max(ap, ad) < 1e-10) break;

    X = sym(X + ap * dX);
    y += ad * dy;
    Z = sym(Z + ad * dZ);
    iterations = it;
  }

  const Eigen::MatrixXd K = polish(p, lift(X) * scale);
  rec.primal_residual = relative_violation(p, K, 1.0);
  if (rec.primal_residual > opts.tol_feas)
    throw SolverError("no feasible iterate within tolerance: " + residual_report(rec), rec);
  GramSolution s = finalize(p, K, iterations, rec.dual_residual);
  s.converged = optimal;
  return s;
}

GramSolution solve(const SdpProblem& problem, const SolverOptions& opts) {
  if (opts.backend == Backend::AugmentedLagrangian) return AugmentedLagrangianSolver{}.solve(problem, opts);
  return InteriorPointSolver{}.solve(problem, opts);
}

std::function<void(const IterationRecord&)> write_trace_csv(std::ostream& out) {
  out << "iteration,objective,primal_residual,dual_residual,centering_residual,penalty\n";
  return [&out](const IterationRecord& r) {
    out << r.iteration << ',' << std::setprecision(17) << r.objective << ',' << r.primal_residual << ','
        << r.dual_residual << ',' << r.centering_residual << ',' << r.penalty << '\n';
  };
}

int nonzero_rank(const Eigen::VectorXd& eigenvalues) {
  if (eigenvalues.size() == 0 || eigenvalues(0) <= 0.0) return 0;
  const double cut = zero_eigenvalue_ratio * eigenvalues(0);
  int r = 0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
    if (eigenvalues(i) >= cut) ++r;
  return r;
}

Embedding embed(const GramSolution& solution, const DimRule& rule) {
  const Eigen::VectorXd& lam = solution.eigenvalues;
  const auto n = static_cast<int>(lam.size());
  if (n == 0 || lam(0) <= 0.0) fail(ErrorKind::Solver, "degenerate Gram matrix: no positive eigenvalue");
  const double positive_mass = lam.cwiseMax(0.0).sum();

  int d = 0;
  if (const auto* e = std::get_if<ExplicitDim>(&rule)) {
    if (e->d < 1 || e->d > n) fail(ErrorKind::Input, "embedding dimension " + std::to_string(e->d) + " out of range");
    d = e->d;
  } else if (const auto* t = std::get_if<SpectrumThreshold>(&rule)) {
    double acc = 0.0;
    for (d = 1; d <= n; ++d) {
      acc += std::max(lam(d - 1), 0.0);
      if (acc >= t->theta * positive_mass) break;
    }
    d = std::min(d, n);
  } else {
    d = nonzero_rank(lam);
  }

  Embedding emb;
  emb.retained_dims = d;
  emb.Y.resize(solution.eigenvectors.rows(), d);
  double kept = 0.0;
  for (int i = 0; i < d; ++i) {
    emb.Y.col(i) = std::sqrt(std::max(lam(i), 0.0)) * solution.eigenvectors.col(i);
    kept += lam(i);
  }
  emb.spectrum_fraction = kept / positive_mass;
  return emb;
}

double pairwise_variance(const Eigen::MatrixXd& Y) {
  const auto n = Y.rows();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) acc += (Y.row(i) - Y.row(j)).squaredNorm();
  return acc / (2.0 * static_cast<double>(n));
}

}  // namespace mvugpca::mvu
