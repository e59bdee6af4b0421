// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mvugpca/error.hpp"
#include "mvugpca/graph.hpp"

namespace mvugpca::mvu {

/// K_ii − 2K_ij + K_jj = target.
struct DistanceConstraint {
  int i = 0;
  int j = 0;
  double target = 0.0;
};

/// max tr(K) s.t. K ⪰ 0, Σ_ij K_ij = 0 and one distance constraint per G′
/// edge. The centering constraint is implicit.
struct SdpProblem {
  int n = 0;
  std::vector<DistanceConstraint> constraints;
};

/// One distance constraint per G′ edge. Throws Error(Graph) when G′ has no
/// edges: the program would be unbounded.
SdpProblem assemble(const graph::NeighborGraph& graph);

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double centering_residual = 0.0;
  double penalty = 0.0;
};

enum class Backend {
  InteriorPoint,          // primal-dual path following, HKM direction
  AugmentedLagrangian,    // first-order, alternating directions on the dual
};

struct SolverOptions {
  Backend backend = Backend::InteriorPoint;

  double tol_feas = 1e-6;  // distance violation / max(D_ij, 1), and centering
  double tol_psd = 1e-8;   // min eigenvalue >= -tol_psd * lambda_max
  double tol_dual = 1e-8;  // relative dual infeasibility
  double tol_gap = 1e-7;   // relative duality gap (interior point)
  double tol_objective = 1e-9;  // relative change over `objective_window` iterations (AL)
  int objective_window = 10;
  int max_iter = 0;  // 0 picks the backend default: 100 (IP) or 20000 (AL)

  // AL penalty schedule: start value, multiplicative step, bounds, and the
  // number of consecutive unbalanced iterations that trigger a step.
  double penalty_init = 1.0;
  double penalty_factor = 1.6;
  double penalty_min = 1e-4;
  double penalty_max = 1e4;
  int penalty_patience = 20;

  /// AL warm start, normally the centered input Gram matrix (always
  /// feasible). The interior-point backend starts from scaled identities.
  std::optional<Eigen::MatrixXd> initial;

  /// When every pair is constrained, K is fixed by the distances alone and is
  /// computed in closed form without iterating.
  bool exact_complete_graph = true;

  /// Per-iteration callback; see write_trace_csv for a ready-made sink.
  std::function<void(const IterationRecord&)> trace;
};

struct GramSolution {
  Eigen::MatrixXd K;
  Eigen::VectorXd eigenvalues;   // nonincreasing
  Eigen::MatrixXd eigenvectors;  // columns, orthonormal
  double objective = 0.0;        // tr(K)
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double centering_residual = 0.0;
  double min_eigenvalue = 0.0;
  int iterations = 0;
  bool converged = false;  // all stopping tests met (not just feasibility)
};

/// Raised when max_iter runs out before the tolerances are met.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, IterationRecord last)
      : Error(ErrorKind::Solver, what), last_(last) {}
  const IterationRecord& last() const noexcept { return last_; }

 private:
  IterationRecord last_;
};

class SdpSolver {
 public:
  virtual ~SdpSolver() = default;
  virtual GramSolution solve(const SdpProblem& problem, const SolverOptions& opts) const = 0;
};

/// Alternating-direction augmented Lagrangian on the dual program: a linear
/// solve for the constraint multipliers, then a PSD-cone projection by
/// eigenvalue clipping. The primal iterate is PSD by construction. Cheap per
/// iteration but slow to reach tight tolerances on long chains.
class AugmentedLagrangianSolver final : public SdpSolver {
 public:
  GramSolution solve(const SdpProblem& problem, const SolverOptions& opts) const override;
};

/// Infeasible primal-dual path following with the HKM search direction and a
/// Mehrotra predictor-corrector step. Every constraint matrix is rank one
/// (aaᵀ), so the Schur complement is the Hadamard product (AᵀZ⁻¹A)∘(AᵀXA).
class InteriorPointSolver final : public SdpSolver {
 public:
  GramSolution solve(const SdpProblem& problem, const SolverOptions& opts) const override;
};

/// Dispatches on opts.backend.
GramSolution solve(const SdpProblem& problem, const SolverOptions& opts = {});

/// Residuals of an arbitrary K against the problem: max over constraints of
/// |K_ii + K_jj − 2K_ij − D_ij| / max(D_ij, 1), and |Σ K| / (N·tr K).
double primal_residual(const SdpProblem& problem, const Eigen::MatrixXd& K);
double centering_residual(const Eigen::MatrixXd& K);

/// Gram matrix of the mean-centred rows of `points`.
Eigen::MatrixXd centered_gram(const Eigen::MatrixXd& points);

/// Writes a CSV header and returns a trace callback appending one line per
/// iteration to `out`.
std::function<void(const IterationRecord&)> write_trace_csv(std::ostream& out);

struct ExplicitDim {
  int d = 1;
};
struct SpectrumThreshold {
  double theta = 0.99;
};
/// Every eigenvalue at or above zero_eigenvalue_ratio·λ_max.
struct AllNonzero {};
using DimRule = std::variant<ExplicitDim, SpectrumThreshold, AllNonzero>;

inline constexpr double zero_eigenvalue_ratio = 1e-9;

struct Embedding {
  Eigen::MatrixXd Y;  // N × d
  int retained_dims = 0;
  double spectrum_fraction = 0.0;
};

/// Y(n, i) = sqrt(max(λ_i, 0))·V(n, i) for the leading d eigenpairs.
Embedding embed(const GramSolution& solution, const DimRule& rule);

/// Number of eigenvalues at or above zero_eigenvalue_ratio·λ_max.
int nonzero_rank(const Eigen::VectorXd& eigenvalues);

/// (1/(2N))·Σ_i Σ_j ‖y_i − y_j‖², evaluated pair by pair.
double pairwise_variance(const Eigen::MatrixXd& Y);

}  // namespace mvugpca::mvu
