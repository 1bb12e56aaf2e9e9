#pragma once

#include <cstdint>
#include <vector>

#include "smx/basis.hpp"
#include "smx/dataset.hpp"

namespace smx {

/// Ground truth of a simulated experiment: the common signal on the grid plus
/// the per-group nuisance parameters, all reproducible from the seed.
struct SimTruth {
  NdArray signal;                               // f on the observation grid
  std::uint64_t seed = 0;
  std::vector<std::vector<int>> nuisance_indices;  // J_g, 7 basis indices per group
  std::vector<double> phases;                      // p_g
};

struct Simulated {
  GroupedDataset data;
  SimTruth truth;
};

/// Test hooks: the generators can drop the noise or nuisance components.
struct GenOptions {
  bool noise = true;
  bool nuisance = true;
};

/// 1D experiment: G = 50 curves on the integer grid 0..2000. The common
/// signal f(u) = cos(10*2*pi*u) + 1.5 sin(5*2*pi*u) is evaluated on the
/// normalized grid u = x/2000. Each group adds 50 * sum_{j in J_g} phi_j at
/// the argument shifted by p_g in normalized units (p_g ~ unif(-pi, pi)
/// domains, so every frequency gets an effectively uniform phase), where
/// phi_j is the period-2000 Fourier system, plus N(0, 10) noise. The
/// attached design holds the first 101 Fourier basis functions on the grid.
Simulated gen_1d(std::uint64_t seed, GenOptions options = {});

/// 3D experiment: G = 50 arrays on the grid {1..25} x {1..25} x {1..101}.
/// The common signal is a separable Gaussian bump with unit peak at
/// (12.5, 12.5, 50) and marginal variances (4, 4, 25). Each group adds
/// 5 * sum_{j in J_g} phi_j(x + s)phi_j(y + s)phi_j(t + s) built from the
/// marginal Fourier systems (period = marginal extent, shift s = p_g periods)
/// plus N(0, 10) noise. The attached design is the cubic B-spline tensor
/// basis with 10 x 10 x 20 functions over the grid.
Simulated gen_3d(std::uint64_t seed, GenOptions options = {});

/// Mean squared error over the grid between the fitted signal Phi beta and
/// the truth.
double mse_vs_truth(const NdArray& beta, const TensorDesign& design, const SimTruth& truth);

/// Number of basis functions used by the marginal B-spline design that
/// gen_3d attaches (10, 10, 20) and its specs, exposed so the CLI defaults
/// and tests agree with the generator.
std::vector<BSplineSpec> gen_3d_basis();
FourierSpec gen_1d_basis();

}  // namespace smx
