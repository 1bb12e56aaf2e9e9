#include "smx/aggregation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace smx {

namespace {

GroupedDataset single_group_view(const GroupedDataset& data, std::size_t g) {
  if (data.is_shared()) {
    GroupedDataset one = GroupedDataset::shared(data.design(), {data.response(g)});
    return data.mask() ? one.masked(*data.mask()) : one;
  }
  return GroupedDataset::general({data.group_design(g)}, {data.response(g)});
}

void check_full_rank_for_ols(const GroupedDataset& data, std::size_t g) {
  const double tol = 1e-10;
  if (data.is_shared()) {
    for (const auto& f : data.design().factors()) {
      const DenseMatrix gram = gram_matrix(f);
      const double top = power_iteration_sym(gram);
      if (top == 0.0 || min_eigenvalue_sym(gram) <= tol * top)
        throw CapabilityError(
            "fit_groups with lambda = 0 needs a full-column-rank design; a design "
            "factor is rank deficient - use lambda > 0");
    }
  } else {
    const DenseMatrix gram = gram_matrix(data.group_design(g));
    const double top = power_iteration_sym(gram);
    if (top == 0.0 || min_eigenvalue_sym(gram) <= tol * top)
      throw CapabilityError("fit_groups with lambda = 0: design of group " +
                            std::to_string(g) +
                            " is rank deficient - use lambda > 0");
  }
}

}  // namespace

GroupEstimates fit_groups(const GroupedDataset& data, double lambda, Penalty penalty,
                          const NpgConfig& config, int threads) {
  if (lambda == 0.0 || penalty == Penalty::kNone) {
    check_full_rank_for_ols(data, 0);
    if (!data.is_shared())
      for (std::size_t g = 1; g < data.num_groups(); ++g) check_full_rank_for_ols(data, g);
  }

  const std::size_t G = data.num_groups();
  GroupEstimates out;
  out.lambda = lambda;
  out.betas.resize(G);
  out.diagnostics.resize(G);

  auto fit_one = [&](std::size_t g) {
    auto view = std::make_shared<GroupedDataset>(single_group_view(data, g));
    SoftMaximinProblem prob{view, 1.0, lambda, penalty};
    SingleFit fit = npg_solve(prob, config);
    out.betas[g] = std::move(fit.beta);
    out.diagnostics[g] = fit.diag;
  };

  const int workers = std::max(1, std::min<int>(threads, int(G)));
  if (workers == 1) {
    for (std::size_t g = 0; g < G; ++g) fit_one(g);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (std::size_t g = next.fetch_add(1); g < G; g = next.fetch_add(1)) fit_one(g);
      });
    for (auto& th : pool) th.join();
  }
  return out;
}

std::vector<double> project_simplex(std::span<const double> v) {
  if (v.empty()) throw PreconditionError("project_simplex of an empty vector");
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0, theta = 0.0;
  std::size_t rho = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    const double cand = (css - 1.0) / double(i + 1);
    if (u[i] - cand > 0.0) {
      rho = i;
      theta = cand;
    }
  }
  std::vector<double> w(v.size());
  (void)rho;
  for (std::size_t i = 0; i < v.size(); ++i) w[i] = std::max(v[i] - theta, 0.0);
  return w;
}

MaggingResult magging(const GroupEstimates& estimates, const GroupedDataset& data) {
  const std::size_t G = estimates.betas.size();
  if (G == 0) throw PreconditionError("magging needs at least one estimate");

  // Fitted signals and their Gram matrix.
  std::vector<NdArray> fits;
  fits.reserve(G);
  for (const auto& b : estimates.betas) {
    if (data.is_shared())
      fits.push_back(design_matvec(data.design(), b));
    else {
      const DenseMatrix& x = data.group_design(0);
      NdArray f({x.rows()});
      for (std::size_t r = 0; r < x.rows(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < x.cols(); ++c) s += x(r, c) * b[c];
        f[r] = s;
      }
      fits.push_back(std::move(f));
    }
  }
  DenseMatrix h(G, G);
  for (std::size_t i = 0; i < G; ++i)
    for (std::size_t j = i; j < G; ++j) {
      const double v = dot(fits[i].data(), fits[j].data());
      h(i, j) = v;
      h(j, i) = v;
    }

  const double hnorm = power_iteration_sym(h);
  std::vector<double> w(G, 1.0 / double(G));
  std::vector<double> hw(G, 0.0);
  auto mul = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < G; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < G; ++j) s += h(i, j) * x[j];
      y[i] = s;
    }
  };
  mul(w, hw);
  double obj = dot(w, hw);
  int it = 0;
  const int max_iter = 100000;
  if (hnorm > 0.0) {
    const double step = 1.0 / hnorm;
    std::vector<double> cand(G);
    for (; it < max_iter; ++it) {
      for (std::size_t i = 0; i < G; ++i) cand[i] = w[i] - step * hw[i];
      cand = project_simplex(cand);
      double wmove = 0.0;
      for (std::size_t i = 0; i < G; ++i) wmove = std::max(wmove, std::abs(cand[i] - w[i]));
      mul(cand, hw);
      const double next = dot(cand, hw);
      w.swap(cand);
      const bool settled = std::abs(obj - next) <= 1e-10 * std::max(1.0, std::abs(obj)) &&
                           wmove <= 1e-10;
      obj = next;
      if (settled) {
        ++it;
        break;
      }
    }
    mul(w, hw);
    obj = dot(w, hw);
  }

  NdArray beta(estimates.betas.front().dims());
  for (std::size_t g = 0; g < G; ++g) axpy(w[g], estimates.betas[g].data(), beta.data());
  return MaggingResult{std::move(beta), std::move(w), obj, it};
}

NdArray mean_aggregate(const GroupEstimates& estimates) {
  if (estimates.betas.empty()) throw PreconditionError("mean_aggregate of no estimates");
  NdArray avg(estimates.betas.front().dims());
  for (const auto& b : estimates.betas) {
    if (!b.same_dims(avg)) throw ShapeError("group estimates disagree on dims");
    axpy(1.0, b.data(), avg.data());
  }
  const double inv = 1.0 / double(estimates.betas.size());
  for (double& v : avg.data()) v *= inv;
  return avg;
}

}  // namespace smx
