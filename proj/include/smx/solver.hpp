#pragma once

#include <string>
#include <vector>

#include "smx/loss.hpp"

namespace smx {

/// Settings for the proximal gradient solvers. L_* and tau/c/M drive the
/// non-monotone backtracking; FISTA only uses max_iter and tol.
struct NpgConfig {
  double L_min = 1e-12;
  double L_max = 1e12;
  double tau = 2.0;    // backtrack factor, > 1
  double c = 1e-4;     // sufficient-decrease constant, > 0
  int M = 4;           // non-monotone memory, >= 0
  int max_iter = 20000;
  double tol = 1e-8;   // relative coefficient-change stopping tolerance
  double kkt_tol = 1e-6;  // certificate scale: converged needs kkt < kkt_tol (1 + lambda)
  // FISTA step heuristic: scales the pairwise response sum inside the
  // Lipschitz bound. 1.0 leaves the bound untouched.
  double pairwise_scale = 1.0;

  enum class InitRule { kBarzilaiBorwein, kConstant };
  InitRule L_init_rule = InitRule::kBarzilaiBorwein;
  double L_init = 1.0;

  void validate() const;
};

struct SolveDiagnostics {
  int iterations = 0;
  int backtracks = 0;
  double objective = 0.0;
  double kkt_residual = 0.0;
  bool converged = false;
};

struct SingleFit {
  NdArray beta;
  SolveDiagnostics diag;
};

/// Per-iteration log of an accepted step: objective value, squared distance
/// moved, and the reference value the acceptance test compared against.
struct IterationRecord {
  double objective = 0.0;
  double step_distance_sq = 0.0;
  double reference = 0.0;
};

/// ||beta - prox_{lambda J / L}(beta - grad / L)||_inf at step 1/L; zero
/// exactly at a solution of the penalized problem.
double kkt_residual(const NdArray& beta, const NdArray& grad, double lambda,
                    Penalty penalty, double L);

/// Accelerated proximal gradient (Beck-Teboulle) with the fixed step
/// 1 / lipschitz_bound. Requires the shared-design mode.
SingleFit fista_solve(const SoftMaximinProblem& problem, const NpgConfig& config,
                      const NdArray* warm_start = nullptr,
                      std::vector<IterationRecord>* trace = nullptr);

/// Non-monotone proximal gradient: Barzilai-Borwein (or constant) choice of
/// L_k in [L_min, L_max], prox step, acceptance against the max of the last
/// M+1 objective values, L_k <- tau L_k on rejection.
SingleFit npg_solve(const SoftMaximinProblem& problem, const NpgConfig& config,
                    const NdArray* warm_start = nullptr,
                    std::vector<IterationRecord>* trace = nullptr);

enum class SolverKind { kFista, kNpg };

/// lambda_max = ||grad s_zeta(0)||_inf followed by K log-spaced values down
/// to ratio * lambda_max.
std::vector<double> lambda_path(const GroupedDataset& data, double zeta, int count,
                                double ratio);

struct FitResult {
  double zeta = 0.0;
  std::vector<double> lambdas;
  std::vector<NdArray> betas;
  std::vector<SolveDiagnostics> diagnostics;
};

/// Solves the path from the largest lambda down, warm-starting each fit from
/// the previous solution.
FitResult solve_path(std::shared_ptr<const GroupedDataset> data, double zeta,
                     const std::vector<double>& lambdas, Penalty penalty,
                     SolverKind solver, const NpgConfig& config);

}  // namespace smx
