#include <doctest.h>

#include "oracles.hpp"
#include "smx/prox.hpp"
#include "smx/solver.hpp"

using namespace smx;

namespace {

std::shared_ptr<const GroupedDataset> share(GroupedDataset d) {
  return std::make_shared<const GroupedDataset>(std::move(d));
}

/// 1D prox oracle: minimize (1/(2t)) (g - v)^2 + |g| over a fine grid.
double prox_grid_oracle(double v, double t) {
  double best = 0.0, best_val = std::numeric_limits<double>::infinity();
  const double lo = -2.0 * std::abs(v) - 1.0, hi = 2.0 * std::abs(v) + 1.0;
  for (int i = 0; i <= 400000; ++i) {
    const double g = lo + (hi - lo) * i / 400000.0;
    const double val = (g - v) * (g - v) / (2.0 * t) + std::abs(g);
    if (val < best_val) {
      best_val = val;
      best = g;
    }
  }
  return best;
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("prox_l1 matches the grid oracle and limits") {
  CHECK(prox_l1(NdArray::vector({3.0}), 1.0)[0] ==
        doctest::Approx(prox_grid_oracle(3.0, 1.0)).epsilon(1e-4));
  CHECK(prox_l1(NdArray::vector({3.0}), 1.0)[0] == doctest::Approx(2.0));
  CHECK(prox_l1(NdArray::vector({-0.5}), 1.0)[0] ==
        doctest::Approx(prox_grid_oracle(-0.5, 1.0)).epsilon(1e-4));
  CHECK(prox_l1(NdArray::vector({-0.5}), 1.0)[0] == 0.0);

  for (double t : {0.1, 1.0, 10.0}) CHECK(prox_l1(NdArray::vector({0.0}), t)[0] == 0.0);

  const NdArray v = NdArray::vector({1.3, -0.4, 0.0, 7.7});
  const NdArray near = prox_l1(v, 1e-14);
  for (std::size_t i = 0; i < v.size(); ++i)
    CHECK(near[i] == doctest::Approx(v[i]).epsilon(1e-10));

  CHECK_THROWS_AS(prox_l1(v, 0.0), PreconditionError);
  CHECK_THROWS_AS(prox_l1(v, -1.0), PreconditionError);
}

TEST_CASE("fista reaches the OLS solution for one group without penalty") {
  auto rng = oracle::engine(100);
  const DenseMatrix x = oracle::random_matrix(rng, 20, 4);
  const NdArray y = oracle::random_array(rng, {20});
  auto ds = share(GroupedDataset::shared(TensorDesign({x}), {y}));

  NpgConfig cfg;
  cfg.tol = 1e-12;
  SoftMaximinProblem prob{ds, 1.0, 0.0, Penalty::kNone};
  const SingleFit fit = fista_solve(prob, cfg);
  CHECK(fit.diag.converged);

  const Eigen::MatrixXd xe = oracle::to_eigen(x);
  const Eigen::VectorXd be =
      (xe.transpose() * xe).ldlt().solve(xe.transpose() * oracle::to_vec(y));
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(std::abs(fit.beta[i] - be[long(i)]) < 1e-6);
}

TEST_CASE("identical groups reduce to the single-group problem") {
  auto rng = oracle::engine(200);
  const DenseMatrix x = oracle::random_matrix(rng, 15, 3);
  const NdArray y = oracle::random_array(rng, {15});
  auto one = share(GroupedDataset::shared(TensorDesign({x}), {y}));
  auto many = share(GroupedDataset::shared(TensorDesign({x}), {y, y, y, y}));

  NpgConfig cfg;
  const double lambda = 0.05;
  const SingleFit a = fista_solve(SoftMaximinProblem{one, 7.0, lambda, Penalty::kL1}, cfg);
  const SingleFit b = fista_solve(SoftMaximinProblem{many, 7.0, lambda, Penalty::kL1}, cfg);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(a.beta[i] == doctest::Approx(b.beta[i]).epsilon(1e-7));
}

TEST_CASE("lambda at or above lambda_max yields the zero solution") {
  auto rng = oracle::engine(300);
  GroupedDataset d = oracle::random_shared_dataset(rng, 5, 4, 3, 3, 4);
  auto ds = share(d);
  const double zeta = 5.0;
  const double lmax = lambda_path(*ds, zeta, 2, 0.5).front();

  for (double lambda : {lmax, 2.0 * lmax}) {
    const SingleFit fit = npg_solve(SoftMaximinProblem{ds, zeta, lambda, Penalty::kL1},
                                    NpgConfig{});
    CHECK(max_abs(fit.beta.data()) == 0.0);
    CHECK(fit.diag.converged);
  }
}

TEST_CASE("npg agrees with fista on identical-design instances") {
  auto rng = oracle::engine(400);
  for (int rep = 0; rep < 5; ++rep) {
    GroupedDataset d = oracle::random_shared_dataset(rng, 4 + rep % 3, 5, 3, 2, 3 + rep);
    auto ds = share(d);
    const double zeta = 2.0 + rep;
    const double lambda = 0.02 * (1 + rep);
    NpgConfig cfg;
    cfg.tol = 1e-10;
    const SingleFit a = fista_solve(SoftMaximinProblem{ds, zeta, lambda, Penalty::kL1}, cfg);
    const SingleFit b = npg_solve(SoftMaximinProblem{ds, zeta, lambda, Penalty::kL1}, cfg);
    REQUIRE(a.diag.converged);
    REQUIRE(b.diag.converged);
    CHECK(std::abs(a.diag.objective - b.diag.objective) <=
          1e-8 * std::max(1.0, std::abs(a.diag.objective)));
  }
}

TEST_CASE("npg handles the unbounded-Hessian counterexample") {
  const DenseMatrix x1 = DenseMatrix::identity(2);
  const DenseMatrix x2(2, 2, {0.0, std::sqrt(2.0), 0.0, 0.0});
  auto ds = share(GroupedDataset::general(
      {x1, x2}, {NdArray::vector({0.0, 0.0}), NdArray::vector({0.0, 0.0})}));
  SoftMaximinProblem prob{ds, 100.0, 0.1, Penalty::kL1};
  NpgConfig cfg;
  const NdArray start = NdArray::vector({5.0, 5.0});
  const SingleFit fit = npg_solve(prob, cfg, &start);
  CHECK(fit.diag.converged);
  CHECK(fit.diag.iterations < cfg.max_iter);
  // Optimum is beta = 0 here.
  CHECK(max_abs(fit.beta.data()) < 1e-6);
}

TEST_CASE("M = 0 gives a monotone objective sequence") {
  auto rng = oracle::engine(500);
  GroupedDataset d = oracle::random_shared_dataset(rng, 6, 4, 4, 3, 5);
  auto ds = share(d);
  NpgConfig cfg;
  cfg.M = 0;
  std::vector<IterationRecord> trace;
  const SingleFit fit =
      npg_solve(SoftMaximinProblem{ds, 3.0, 0.01, Penalty::kL1}, cfg, nullptr, &trace);
  REQUIRE(trace.size() > 2);
  for (std::size_t k = 1; k < trace.size(); ++k)
    CHECK(trace[k].objective <= trace[k - 1].objective + 1e-15);
  CHECK(fit.diag.converged);
}

TEST_CASE("accepted iterates satisfy the line-4 inequality as logged") {
  auto rng = oracle::engine(600);
  GroupedDataset d = oracle::random_shared_dataset(rng, 5, 5, 3, 3, 4);
  auto ds = share(d);
  NpgConfig cfg;
  std::vector<IterationRecord> trace;
  npg_solve(SoftMaximinProblem{ds, 10.0, 0.02, Penalty::kL1}, cfg, nullptr, &trace);
  REQUIRE(!trace.empty());
  for (const auto& rec : trace)
    CHECK(rec.objective <= rec.reference - 0.5 * cfg.c * rec.step_distance_sq + 1e-15);
}

TEST_CASE("objective at the solution never exceeds the objective at zero") {
  auto rng = oracle::engine(700);
  for (int rep = 0; rep < 5; ++rep) {
    GroupedDataset d = oracle::random_shared_dataset(rng, 4, 4, 3, 2, 3);
    auto ds = share(d);
    const double zeta = 1.0 + rep;
    const double lambda = 0.05;
    SoftMaximinProblem prob{ds, zeta, lambda, Penalty::kL1};
    const SingleFit fit = npg_solve(prob, NpgConfig{});
    const double at_zero = softmaximin_loss(prob, NdArray(ds->coefficient_dims()));
    CHECK(fit.diag.objective <= at_zero + 1e-12);
  }
}

TEST_CASE("kkt certificate on converged full-rank fits") {
  auto rng = oracle::engine(800);
  for (int rep = 0; rep < 5; ++rep) {
    GroupedDataset d = oracle::random_shared_dataset(rng, 7, 6, 3, 3, 4);
    auto ds = share(d);
    const double lambda = rep * 0.02;
    const SingleFit fit =
        npg_solve(SoftMaximinProblem{ds, 4.0, lambda, Penalty::kL1}, NpgConfig{});
    REQUIRE(fit.diag.converged);
    CHECK(fit.diag.kkt_residual < 1e-6 * (1.0 + lambda));
  }
}

TEST_CASE("lambda_path spacing, endpoints and errors") {
  auto rng = oracle::engine(900);
  GroupedDataset d = oracle::random_shared_dataset(rng, 5, 4, 3, 3, 5);
  const double zeta = 3.0;
  const auto path = lambda_path(d, zeta, 10, 1e-4);
  REQUIRE(path.size() == 10);
  for (std::size_t k = 0; k < 10; ++k)
    CHECK(path[k] ==
          doctest::Approx(path[0] * std::pow(10.0, -4.0 * double(k) / 9.0)).epsilon(1e-12));
  for (std::size_t k = 1; k < 10; ++k) CHECK(path[k] < path[k - 1]);

  // The fit at lambda_max is exactly zero (KKT at the origin).
  auto ds = share(d);
  const SingleFit top =
      npg_solve(SoftMaximinProblem{ds, zeta, path[0], Penalty::kL1}, NpgConfig{});
  CHECK(max_abs(top.beta.data()) == 0.0);

  CHECK_THROWS_AS(lambda_path(d, zeta, 0, 0.5), PreconditionError);
  CHECK_THROWS_AS(lambda_path(d, zeta, 5, 0.0), PreconditionError);
  CHECK_THROWS_AS(lambda_path(d, zeta, 5, 1.0), PreconditionError);
}

TEST_CASE("warm-started path: objective is continuous in lambda") {
  auto rng = oracle::engine(1000);
  GroupedDataset d = oracle::random_shared_dataset(rng, 6, 5, 4, 3, 4);
  auto ds = share(d);
  const double zeta = 5.0;
  const auto lambdas = lambda_path(d, zeta, 8, 1e-3);
  const FitResult path = solve_path(ds, zeta, lambdas, Penalty::kL1, SolverKind::kNpg,
                                    NpgConfig{});
  for (std::size_t k = 1; k < lambdas.size(); ++k) {
    SoftMaximinProblem prob{ds, zeta, lambdas[k], Penalty::kL1};
    const double at_prev = softmaximin_loss(prob, path.betas[k - 1]) +
                           lambdas[k] * l1_norm(path.betas[k - 1].data());
    const double at_cur = softmaximin_loss(prob, path.betas[k]) +
                          lambdas[k] * l1_norm(path.betas[k].data());
    CHECK(at_cur <= at_prev + 1e-12);
  }
}

TEST_CASE("determinism: same inputs give bit-identical fits") {
  auto rng = oracle::engine(1100);
  GroupedDataset d = oracle::random_shared_dataset(rng, 5, 5, 3, 3, 6);
  auto ds = share(d);
  SoftMaximinProblem prob{ds, 9.0, 0.01, Penalty::kL1};
  const SingleFit a = npg_solve(prob, NpgConfig{});
  const SingleFit b = npg_solve(prob, NpgConfig{});
  REQUIRE(a.beta.size() == b.beta.size());
  for (std::size_t i = 0; i < a.beta.size(); ++i) CHECK(a.beta[i] == b.beta[i]);
  CHECK(a.diag.objective == b.diag.objective);
  CHECK(a.diag.iterations == b.diag.iterations);
}

TEST_CASE("config validation") {
  NpgConfig bad;
  bad.tau = 1.0;
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
  bad = NpgConfig{};
  bad.L_min = -1.0;
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
  bad = NpgConfig{};
  bad.M = -2;
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
}

}  // TEST_SUITE
