#pragma once

#include <memory>
#include <span>
#include <vector>

#include "smx/dataset.hpp"

namespace smx {

enum class Penalty { kL1, kNone };

/// Penalized soft maximin problem: minimize lse_zeta(h(beta)) + lambda * J
/// with h_g = -Vhat_g (negative explained variance per group).
struct SoftMaximinProblem {
  std::shared_ptr<const GroupedDataset> data;
  double zeta = 1.0;
  double lambda = 0.0;
  Penalty penalty = Penalty::kL1;

  void validate() const;
};

/// Scaled log-sum-exp, log(sum_g exp(zeta x_g)) / zeta, computed with the
/// max-shift so it stays finite whenever the inputs are finite.
double lse(std::span<const double> x, double zeta);

/// w_g = exp(zeta h_g - zeta lse(h, zeta)); non-negative, sums to one.
std::vector<double> softmax_weights(std::span<const double> h, double zeta);

/// Empirical explained variance of group g at beta,
/// (2 beta^T X_g^T y_g - beta^T X_g^T X_g beta) / n_g.
double explained_variance(const GroupedDataset& data, std::size_t g, const NdArray& beta);

/// h_g(beta) = -Vhat_g(beta) for every group.
std::vector<double> group_losses(const GroupedDataset& data, const NdArray& beta);

double softmaximin_loss(const SoftMaximinProblem& problem, const NdArray& beta);

NdArray softmaximin_gradient(const SoftMaximinProblem& problem, const NdArray& beta);

/// Exact Hessian of the soft maximin loss by the pairwise rank-one formula
/// plus the weighted group Hessians. Diagnostic only: guarded to p <= 200.
DenseMatrix softmaximin_hessian(const SoftMaximinProblem& problem, const NdArray& beta);

/// Upper bound on the Lipschitz constant of the soft maximin gradient for
/// shared designs: L (1 + (2/n) sum_{i<j} ||y_i - y_j||^2), L = 2||X^T X||/n.
/// pairwise_scale < 1 shrinks the pairwise sum, an optional step-size
/// heuristic for callers that monitor convergence themselves.
double lipschitz_bound(const GroupedDataset& data, double pairwise_scale = 1.0);

/// One evaluation of the soft maximin loss with everything the solvers need:
/// the per-group losses, softmax weights, and the gradient, sharing a single
/// pass over the fitted values.
struct LossEvaluation {
  double loss = 0.0;
  std::vector<double> group_h;
  std::vector<double> weights;
  NdArray gradient;
};

class SoftMaximinEvaluator {
 public:
  SoftMaximinEvaluator(std::shared_ptr<const GroupedDataset> data, double zeta);

  double loss(const NdArray& beta) const;
  LossEvaluation loss_and_gradient(const NdArray& beta) const;
  std::vector<double> losses(const NdArray& beta) const;

  const GroupedDataset& data() const { return *data_; }
  double zeta() const { return zeta_; }

 private:
  std::vector<double> group_losses_shared(const NdArray& beta, NdArray* fitted_out) const;

  std::shared_ptr<const GroupedDataset> data_;
  double zeta_;
};

}  // namespace smx
