#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "smx/ndarray.hpp"
#include "smx/tensor_design.hpp"

namespace smx {

/// G response groups together with their design. Two layouts:
///   shared mode  - one TensorDesign for all groups, responses on the row grid;
///   general mode - a dense design matrix per group, vector responses.
/// An optional 0/1 observation mask (shared across groups, shared mode only)
/// zero-weights cells; per-group counts shrink accordingly. Instances are
/// immutable after construction; beta-independent quantities (X_g^T y_g, the
/// pairwise response distance sum) are computed once up front.
class GroupedDataset {
 public:
  static GroupedDataset shared(TensorDesign design, std::vector<NdArray> responses);
  static GroupedDataset general(std::vector<DenseMatrix> designs,
                                std::vector<NdArray> responses);

  /// Same data restricted to cells where mask != 0 (shared mode only).
  GroupedDataset masked(const NdArray& mask) const;

  bool is_shared() const { return design_.has_value(); }
  std::size_t num_groups() const { return responses_->size(); }
  std::size_t group_size(std::size_t g) const;
  std::size_t num_coefficients() const;
  std::vector<std::size_t> coefficient_dims() const;

  const TensorDesign& design() const;
  const DenseMatrix& group_design(std::size_t g) const;
  const NdArray& response(std::size_t g) const { return (*responses_)[g]; }
  const NdArray* mask() const { return mask_ ? mask_.get() : nullptr; }
  std::size_t observed_count() const { return observed_; }

  /// Cached X_g^T y_g (mask applied), as a coefficient-shaped array.
  const NdArray& xty(std::size_t g) const { return xty_[g]; }
  /// All xty vectors side by side, p x G.
  const DenseMatrix& xty_matrix() const { return xty_matrix_; }

  /// sum_{i<j} ||y_i - y_j||^2 over masked responses, via
  /// G * sum ||y_g||^2 - ||sum y_g||^2.
  double pairwise_response_distance_sum() const;

  /// Applies the design to a coefficient array (shared mode), zeroing masked
  /// cells of the result.
  NdArray fitted(const NdArray& beta) const;

  /// Phi^T v with the mask applied to v first (shared mode).
  NdArray tmatvec_masked(const NdArray& v) const;

 private:
  GroupedDataset() = default;
  void finalize();

  std::optional<TensorDesign> design_;
  std::vector<DenseMatrix> designs_;  // general mode
  std::shared_ptr<const std::vector<NdArray>> responses_;
  std::shared_ptr<const NdArray> mask_;
  std::size_t observed_ = 0;  // unmasked cells per group (shared mode)

  std::vector<NdArray> xty_;
  DenseMatrix xty_matrix_;
  double pairwise_dist_ = 0.0;
  bool pairwise_valid_ = false;
};

}  // namespace smx
