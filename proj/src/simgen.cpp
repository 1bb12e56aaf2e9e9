#include "smx/simgen.hpp"

#include <cmath>
#include <numbers>

#include "smx/rng.hpp"

namespace smx {

namespace {

constexpr std::uint64_t kGroupTag = 0x67726f75;   // nuisance/phase stream
constexpr std::uint64_t kNoiseTag = 0x6e6f6973;   // per-group noise stream

/// 7 distinct indices from {1..101}, by rejection.
std::vector<int> draw_indices(CounterRng& rng) {
  std::vector<int> out;
  while (out.size() < 7) {
    const int j = 1 + int(rng.below(101));
    bool seen = false;
    for (int v : out) seen = seen || v == j;
    if (!seen) out.push_back(j);
  }
  return out;
}

}  // namespace

FourierSpec gen_1d_basis() { return FourierSpec{101, 2000.0}; }

std::vector<BSplineSpec> gen_3d_basis() {
  return {BSplineSpec{3, 10, 1.0, 25.0}, BSplineSpec{3, 10, 1.0, 25.0},
          BSplineSpec{3, 20, 1.0, 101.0}};
}

Simulated gen_1d(std::uint64_t seed, GenOptions options) {
  const std::size_t n = 2001;
  const std::size_t G = 50;
  const FourierSpec spec = gen_1d_basis();

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = double(i);

  NdArray f({n});
  for (std::size_t i = 0; i < n; ++i) {
    const double u = x[i] / 2000.0;
    f[i] = std::cos(10.0 * 2.0 * std::numbers::pi * u) +
           1.5 * std::sin(5.0 * 2.0 * std::numbers::pi * u);
  }

  SimTruth truth;
  truth.signal = f;
  truth.seed = seed;

  std::vector<NdArray> responses;
  responses.reserve(G);
  for (std::size_t g = 0; g < G; ++g) {
    CounterRng grng(CounterRng::derive_key(seed, kGroupTag, g));
    CounterRng nrng(CounterRng::derive_key(seed, kNoiseTag, g));
    const std::vector<int> J = draw_indices(grng);
    const double p = grng.uniform(-std::numbers::pi, std::numbers::pi);
    truth.nuisance_indices.push_back(J);
    truth.phases.push_back(p);

    NdArray y = f;
    // Shift by p normalized domains: x/2000 + p, i.e. x + 2000 p grid units.
    const double shift = 2000.0 * p;
    for (std::size_t i = 0; i < n; ++i) {
      if (options.nuisance) {
        double nu = 0.0;
        for (int j : J) nu += fourier_eval(spec, j, x[i] + shift);
        y[i] += 50.0 * nu;
      }
      if (options.noise) y[i] += nrng.normal(0.0, std::sqrt(10.0));
    }
    responses.push_back(std::move(y));
  }

  TensorDesign design({fourier_design(spec, x)});
  return Simulated{GroupedDataset::shared(std::move(design), std::move(responses)),
                   std::move(truth)};
}

Simulated gen_3d(std::uint64_t seed, GenOptions options) {
  const std::size_t nx = 25, ny = 25, nt = 101, G = 50;
  std::vector<double> xs(nx), ys(ny), ts(nt);
  for (std::size_t i = 0; i < nx; ++i) xs[i] = double(i + 1);
  for (std::size_t i = 0; i < ny; ++i) ys[i] = double(i + 1);
  for (std::size_t i = 0; i < nt; ++i) ts[i] = double(i + 1);

  auto bump = [](double v, double mu, double var) {
    const double d = v - mu;
    return std::exp(-d * d / (2.0 * var));
  };
  std::vector<double> fx(nx), fy(ny), ft(nt);
  for (std::size_t i = 0; i < nx; ++i) fx[i] = bump(xs[i], 12.5, 4.0);
  for (std::size_t i = 0; i < ny; ++i) fy[i] = bump(ys[i], 12.5, 4.0);
  for (std::size_t i = 0; i < nt; ++i) ft[i] = bump(ts[i], 50.0, 25.0);

  NdArray f({nx, ny, nt});
  {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < nt; ++k)
      for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) f[flat++] = fx[i] * fy[j] * ft[k];
  }

  const FourierSpec sx{101, double(nx)}, sy{101, double(ny)}, st{101, double(nt)};

  SimTruth truth;
  truth.signal = f;
  truth.seed = seed;

  std::vector<NdArray> responses;
  responses.reserve(G);
  std::vector<double> vx(nx), vy(ny), vt(nt);
  for (std::size_t g = 0; g < G; ++g) {
    CounterRng grng(CounterRng::derive_key(seed, kGroupTag, g));
    CounterRng nrng(CounterRng::derive_key(seed, kNoiseTag, g));
    const std::vector<int> J = draw_indices(grng);
    const double p = grng.uniform(-std::numbers::pi, std::numbers::pi);
    truth.nuisance_indices.push_back(J);
    truth.phases.push_back(p);

    NdArray y = f;
    if (options.nuisance)
    for (int j : J) {
      // Shift by p marginal periods along each axis.
      for (std::size_t i = 0; i < nx; ++i) vx[i] = fourier_eval(sx, j, xs[i] + p * sx.period);
      for (std::size_t i = 0; i < ny; ++i) vy[i] = fourier_eval(sy, j, ys[i] + p * sy.period);
      for (std::size_t i = 0; i < nt; ++i) vt[i] = fourier_eval(st, j, ts[i] + p * st.period);
      std::size_t flat = 0;
      for (std::size_t k = 0; k < nt; ++k)
        for (std::size_t jj = 0; jj < ny; ++jj)
          for (std::size_t i = 0; i < nx; ++i) y[flat++] += 5.0 * vx[i] * vy[jj] * vt[k];
    }
    if (options.noise)
      for (double& v : y.data()) v += nrng.normal(0.0, std::sqrt(10.0));
    responses.push_back(std::move(y));
  }

  const auto specs = gen_3d_basis();
  TensorDesign design({bspline_design(specs[0], xs), bspline_design(specs[1], ys),
                       bspline_design(specs[2], ts)});
  return Simulated{GroupedDataset::shared(std::move(design), std::move(responses)),
                   std::move(truth)};
}

double mse_vs_truth(const NdArray& beta, const TensorDesign& design, const SimTruth& truth) {
  NdArray fit = design_matvec(design, beta);
  if (!fit.same_dims(truth.signal))
    throw ShapeError("fitted grid " + dims_to_string(fit.dims()) +
                     " does not match truth grid " + dims_to_string(truth.signal.dims()));
  double s = 0.0;
  auto fd = fit.data();
  auto td = truth.signal.data();
  for (std::size_t i = 0; i < fd.size(); ++i) {
    const double d = fd[i] - td[i];
    s += d * d;
  }
  return s / double(fd.size());
}

}  // namespace smx
