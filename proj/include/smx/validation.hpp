#pragma once

#include <cstdint>
#include <vector>

#include "smx/solver.hpp"

namespace smx {

/// Block-holdout cross-validation: each repeat removes one uniformly random
/// axis-aligned block (the same block for every group), refits the lambda
/// path on the remaining cells and scores the held-out soft maximin loss.
struct CvConfig {
  int repeats = 10;
  std::vector<std::size_t> block_dims;
  std::uint64_t seed = 0;
  double zeta = 1.0;
  std::vector<double> lambdas;
  Penalty penalty = Penalty::kL1;
  SolverKind solver = SolverKind::kNpg;
  NpgConfig solver_config;
};

struct CvReport {
  std::vector<double> lambdas;
  std::vector<double> mean_losses;               // per lambda, averaged over repeats
  std::vector<std::vector<double>> repeat_losses;  // [repeat][lambda]
  std::size_t selected = 0;  // argmin of mean loss; ties -> smallest index
};

/// Soft maximin loss restricted to the cells where mask != 0, with per-group
/// counts replaced by the held-out count.
double holdout_loss(const GroupedDataset& data, const NdArray& beta, const NdArray& mask,
                    double zeta);

/// Argmin over mean losses; ties keep the smallest index (the strongest
/// penalty, since paths are decreasing).
std::size_t select_lambda_index(std::span<const double> mean_losses);

CvReport block_cv(const GroupedDataset& data, const CvConfig& config);

}  // namespace smx
