#pragma once

#include <vector>

#include "smx/solver.hpp"

namespace smx {

/// Per-group penalized least squares estimates sharing one lambda.
struct GroupEstimates {
  std::vector<NdArray> betas;
  double lambda = 0.0;
  std::vector<SolveDiagnostics> diagnostics;
};

/// Fits each group separately (G = 1 soft maximin with the given lambda) via
/// the proximal machinery. lambda = 0 requires a full-column-rank design.
GroupEstimates fit_groups(const GroupedDataset& data, double lambda, Penalty penalty,
                          const NpgConfig& config, int threads = 1);

/// Euclidean projection onto {w : w_g >= 0, sum w_g = 1} (sort-and-threshold).
std::vector<double> project_simplex(std::span<const double> v);

struct MaggingResult {
  NdArray beta;
  std::vector<double> weights;
  double objective = 0.0;  // || sum_g w_g Phi beta_g ||^2 at the solution
  int iterations = 0;
};

/// Maximin aggregation: weights minimizing the norm of the convex combination
/// of fitted signals, by projected gradient on the G x G Gram matrix of the
/// fitted vectors. Returns sum_g w_g beta_g.
MaggingResult magging(const GroupEstimates& estimates, const GroupedDataset& data);

/// Entrywise average of the group estimates.
NdArray mean_aggregate(const GroupEstimates& estimates);

}  // namespace smx
