#include "smx/dataset.hpp"

#include <cmath>
#include <string>

namespace smx {

GroupedDataset GroupedDataset::shared(TensorDesign design, std::vector<NdArray> responses) {
  if (responses.empty()) throw PreconditionError("dataset needs at least one group");
  const auto rows = design.row_dims();
  for (const auto& y : responses)
    if (y.dims() != rows)
      throw ShapeError("response dims " + dims_to_string(y.dims()) +
                       " do not match design row grid " + dims_to_string(rows));
  GroupedDataset d;
  d.design_ = std::move(design);
  d.responses_ = std::make_shared<const std::vector<NdArray>>(std::move(responses));
  d.finalize();
  return d;
}

GroupedDataset GroupedDataset::general(std::vector<DenseMatrix> designs,
                                       std::vector<NdArray> responses) {
  if (responses.empty()) throw PreconditionError("dataset needs at least one group");
  if (designs.size() != responses.size())
    throw ShapeError("got " + std::to_string(designs.size()) + " designs for " +
                     std::to_string(responses.size()) + " groups");
  const std::size_t p = designs.front().cols();
  for (std::size_t g = 0; g < designs.size(); ++g) {
    if (responses[g].rank() != 1)
      throw ShapeError("general-mode responses must be vectors");
    if (designs[g].cols() != p)
      throw ShapeError("all group designs must share the coefficient dimension");
    if (designs[g].rows() != responses[g].size())
      throw ShapeError("group " + std::to_string(g) + ": design rows " +
                       std::to_string(designs[g].rows()) + " vs response length " +
                       std::to_string(responses[g].size()));
  }
  GroupedDataset d;
  d.designs_ = std::move(designs);
  d.responses_ = std::make_shared<const std::vector<NdArray>>(std::move(responses));
  d.finalize();
  return d;
}

GroupedDataset GroupedDataset::masked(const NdArray& mask) const {
  if (!is_shared()) throw CapabilityError("masking requires the shared-design mode");
  if (mask.dims() != design_->row_dims())
    throw ShapeError("mask dims " + dims_to_string(mask.dims()) +
                     " do not match the response grid");
  GroupedDataset d;
  d.design_ = design_;
  d.responses_ = responses_;
  d.mask_ = std::make_shared<const NdArray>(mask);
  d.finalize();
  return d;
}

void GroupedDataset::finalize() {
  const std::size_t G = responses_->size();
  xty_.clear();
  xty_.reserve(G);

  if (is_shared()) {
    observed_ = 0;
    if (mask_) {
      for (double v : mask_->data()) observed_ += (v != 0.0) ? 1 : 0;
      if (observed_ == 0) throw PreconditionError("mask excludes every observation");
    } else {
      observed_ = design_->total_rows();
    }

    NdArray sum_y(design_->row_dims());
    double sum_sq = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
      const NdArray& y = (*responses_)[g];
      if (mask_) {
        NdArray ym = y;
        auto md = mask_->data();
        auto yd = ym.data();
        for (std::size_t i = 0; i < yd.size(); ++i)
          if (md[i] == 0.0) yd[i] = 0.0;
        sum_sq += squared_norm(ym.data());
        axpy(1.0, ym.data(), sum_y.data());
        xty_.push_back(design_tmatvec(*design_, ym));
      } else {
        sum_sq += squared_norm(y.data());
        axpy(1.0, y.data(), sum_y.data());
        xty_.push_back(design_tmatvec(*design_, y));
      }
    }
    pairwise_dist_ = double(G) * sum_sq - squared_norm(sum_y.data());
    pairwise_valid_ = true;
  } else {
    for (std::size_t g = 0; g < G; ++g) {
      const DenseMatrix& x = designs_[g];
      const NdArray& y = (*responses_)[g];
      NdArray v({x.cols()});
      for (std::size_t c = 0; c < x.cols(); ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < x.rows(); ++r) s += x(r, c) * y[r];
        v[c] = s;
      }
      xty_.push_back(std::move(v));
    }
  }

  const std::size_t p = num_coefficients();
  xty_matrix_ = DenseMatrix(p, G);
  for (std::size_t g = 0; g < G; ++g)
    for (std::size_t i = 0; i < p; ++i) xty_matrix_(i, g) = xty_[g][i];
}

std::size_t GroupedDataset::group_size(std::size_t g) const {
  if (is_shared()) return observed_;
  return (*responses_)[g].size();
}

std::size_t GroupedDataset::num_coefficients() const {
  if (is_shared()) return design_->total_cols();
  return designs_.front().cols();
}

std::vector<std::size_t> GroupedDataset::coefficient_dims() const {
  if (is_shared()) return design_->col_dims();
  return {designs_.front().cols()};
}

const TensorDesign& GroupedDataset::design() const {
  if (!is_shared()) throw CapabilityError("dataset is in general (per-group design) mode");
  return *design_;
}

const DenseMatrix& GroupedDataset::group_design(std::size_t g) const {
  if (is_shared()) throw CapabilityError("dataset is in shared-design mode");
  return designs_[g];
}

double GroupedDataset::pairwise_response_distance_sum() const {
  if (!pairwise_valid_)
    throw CapabilityError("pairwise response distances require the shared-design mode");
  return pairwise_dist_;
}

NdArray GroupedDataset::fitted(const NdArray& beta) const {
  NdArray out = design_matvec(design(), beta);
  if (mask_) {
    auto md = mask_->data();
    auto od = out.data();
    for (std::size_t i = 0; i < od.size(); ++i)
      if (md[i] == 0.0) od[i] = 0.0;
  }
  return out;
}

NdArray GroupedDataset::tmatvec_masked(const NdArray& v) const {
  if (mask_) {
    NdArray vm = v;
    auto md = mask_->data();
    auto vd = vm.data();
    for (std::size_t i = 0; i < vd.size(); ++i)
      if (md[i] == 0.0) vd[i] = 0.0;
    return design_tmatvec(design(), vm);
  }
  return design_tmatvec(design(), v);
}

}  // namespace smx
