#include "smx/validation.hpp"

#include <algorithm>
#include <cmath>

#include "smx/rng.hpp"

namespace smx {

double holdout_loss(const GroupedDataset& data, const NdArray& beta, const NdArray& mask,
                    double zeta) {
  bool any = false;
  for (double v : mask.data())
    if (v != 0.0) {
      any = true;
      break;
    }
  if (!any) throw PreconditionError("holdout_loss: empty mask");
  GroupedDataset held = data.masked(mask);
  SoftMaximinEvaluator eval(std::make_shared<GroupedDataset>(std::move(held)), zeta);
  return eval.loss(beta);
}

CvReport block_cv(const GroupedDataset& data, const CvConfig& config) {
  if (!data.is_shared()) throw CapabilityError("block_cv requires the shared-design mode");
  if (config.repeats < 1) throw PreconditionError("block_cv needs repeats >= 1");
  if (config.lambdas.empty()) throw PreconditionError("block_cv needs a lambda path");

  const auto grid = data.design().row_dims();
  const auto& block = config.block_dims;
  if (block.size() != grid.size())
    throw ShapeError("block rank " + std::to_string(block.size()) +
                     " does not match grid rank " + std::to_string(grid.size()));
  bool strict = false;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (block[k] == 0 || block[k] > grid[k])
      throw PreconditionError("block extent along axis " + std::to_string(k) +
                              " must lie in [1, " + std::to_string(grid[k]) + "]");
    if (block[k] < grid[k]) strict = true;
  }
  if (!strict)
    throw PreconditionError("held-out block must be smaller than the full grid");

  CvReport report;
  report.lambdas = config.lambdas;
  report.mean_losses.assign(config.lambdas.size(), 0.0);

  const std::size_t cells = checked_product(grid);
  for (int r = 0; r < config.repeats; ++r) {
    // independent stream per repeat
    CounterRng rep(CounterRng::derive_key(config.seed, 0x9e3779b9, std::uint64_t(r)));
    std::vector<std::size_t> start(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
      start[k] = std::size_t(rep.below(grid[k] - block[k] + 1));

    NdArray holdout{std::vector<std::size_t>(grid)};
    NdArray keep{std::vector<std::size_t>(grid)};
    {
      auto hd = holdout.data();
      auto kd = keep.data();
      std::vector<std::size_t> idx(grid.size());
      for (std::size_t flat = 0; flat < cells; ++flat) {
        std::size_t rem = flat;
        bool inside = true;
        for (std::size_t k = 0; k < grid.size(); ++k) {
          idx[k] = rem % grid[k];
          rem /= grid[k];
          if (idx[k] < start[k] || idx[k] >= start[k] + block[k]) inside = false;
        }
        hd[flat] = inside ? 1.0 : 0.0;
        kd[flat] = inside ? 0.0 : 1.0;
      }
    }
    // Train/holdout cells are complementary by construction; assert it.
    for (std::size_t flat = 0; flat < cells; ++flat)
      if (holdout.data()[flat] != 0.0 && keep.data()[flat] != 0.0)
        throw NumericalError("block_cv: train and holdout masks overlap");

    auto train = std::make_shared<GroupedDataset>(data.masked(keep));
    FitResult path = solve_path(train, config.zeta, config.lambdas, config.penalty,
                                config.solver, config.solver_config);
    std::vector<double> losses(config.lambdas.size());
    for (std::size_t i = 0; i < path.betas.size(); ++i)
      losses[i] = holdout_loss(data, path.betas[i], holdout, config.zeta);
    for (std::size_t i = 0; i < losses.size(); ++i) report.mean_losses[i] += losses[i];
    report.repeat_losses.push_back(std::move(losses));
  }
  for (double& v : report.mean_losses) v /= double(config.repeats);
  report.selected = select_lambda_index(report.mean_losses);
  return report;
}

std::size_t select_lambda_index(std::span<const double> mean_losses) {
  if (mean_losses.empty()) throw PreconditionError("no losses to select from");
  std::size_t sel = 0;
  for (std::size_t i = 1; i < mean_losses.size(); ++i)
    if (mean_losses[i] < mean_losses[sel]) sel = i;
  return sel;
}

}  // namespace smx
