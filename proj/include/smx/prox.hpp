#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "smx/errors.hpp"
#include "smx/ndarray.hpp"

namespace smx {

/// Soft-thresholding, the closed-form proximal operator of t * ||.||_1:
/// sign(v_i) * max(|v_i| - t, 0).
inline double soft_threshold(double v, double t) {
  const double mag = std::abs(v) - t;
  return mag > 0.0 ? (v > 0.0 ? mag : -mag) : 0.0;
}

inline void prox_l1_inplace(std::span<double> v, double t) {
  if (!(t > 0.0)) throw PreconditionError("prox_l1 threshold must be positive");
  for (double& x : v) x = soft_threshold(x, t);
}

inline NdArray prox_l1(const NdArray& v, double t) {
  NdArray out = v;
  prox_l1_inplace(out.data(), t);
  return out;
}

inline double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

}  // namespace smx
