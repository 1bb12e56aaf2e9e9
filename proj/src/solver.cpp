#include "smx/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "smx/prox.hpp"

namespace smx {

void NpgConfig::validate() const {
  if (!(L_min > 0.0) || !(L_max >= L_min))
    throw PreconditionError("need 0 < L_min <= L_max");
  if (!(tau > 1.0)) throw PreconditionError("backtrack factor tau must exceed 1");
  if (!(c > 0.0)) throw PreconditionError("sufficient-decrease constant c must be positive");
  if (M < 0) throw PreconditionError("non-monotone memory M must be >= 0");
  if (max_iter < 1) throw PreconditionError("max_iter must be >= 1");
  if (!(tol > 0.0)) throw PreconditionError("tol must be positive");
  if (!(kkt_tol > 0.0)) throw PreconditionError("kkt_tol must be positive");
  if (!(pairwise_scale > 0.0)) throw PreconditionError("pairwise_scale must be positive");
}

namespace {

double penalty_value(std::span<const double> beta, double lambda, Penalty penalty) {
  if (penalty == Penalty::kNone || lambda == 0.0) return 0.0;
  return lambda * l1_norm(beta);
}

void prox_step(NdArray& v, double threshold, Penalty penalty) {
  if (penalty == Penalty::kNone || threshold == 0.0) return;
  prox_l1_inplace(v.data(), threshold);
}

double rel_change(const NdArray& next, const NdArray& prev) {
  double mv = 0.0, mx = 0.0;
  auto nd = next.data();
  auto pd = prev.data();
  for (std::size_t i = 0; i < nd.size(); ++i) {
    mv = std::max(mv, std::abs(nd[i] - pd[i]));
    mx = std::max(mx, std::abs(nd[i]));
  }
  return mv / (1.0 + mx);
}

[[noreturn]] void throw_nonfinite(const char* who, int iter,
                                  const std::deque<double>& recent) {
  std::ostringstream os;
  os << who << ": non-finite objective at iteration " << iter << "; recent objectives:";
  for (double v : recent) os << " " << v;
  throw NumericalError(os.str());
}

}  // namespace

double kkt_residual(const NdArray& beta, const NdArray& grad, double lambda,
                    Penalty penalty, double L) {
  const double step = 1.0 / L;
  double r = 0.0;
  auto bd = beta.data();
  auto gd = grad.data();
  const bool use_l1 = penalty == Penalty::kL1 && lambda > 0.0;
  for (std::size_t i = 0; i < bd.size(); ++i) {
    double v = bd[i] - step * gd[i];
    if (use_l1) v = soft_threshold(v, lambda * step);
    r = std::max(r, std::abs(bd[i] - v));
  }
  return r;
}

SingleFit fista_solve(const SoftMaximinProblem& problem, const NpgConfig& config,
                      const NdArray* warm_start, std::vector<IterationRecord>* trace) {
  problem.validate();
  config.validate();
  const GroupedDataset& data = *problem.data;
  const double L = lipschitz_bound(data, config.pairwise_scale);
  const double step = 1.0 / L;
  const double kkt_tol = config.kkt_tol * (1.0 + problem.lambda);
  SoftMaximinEvaluator eval(problem.data, problem.zeta);

  NdArray beta = warm_start ? *warm_start : NdArray(data.coefficient_dims());
  if (warm_start && warm_start->size() != data.num_coefficients())
    throw ShapeError("warm start size does not match coefficient count");
  NdArray y = beta;
  NdArray beta_prev = beta;
  double t = 1.0;
  std::deque<double> recent;

  SingleFit out;
  out.diag.kkt_residual = std::numeric_limits<double>::infinity();
  int k = 0;
  for (; k < config.max_iter; ++k) {
    LossEvaluation at_y = eval.loss_and_gradient(y);
    if (!std::isfinite(at_y.loss)) throw_nonfinite("fista_solve", k, recent);
    recent.push_back(at_y.loss);
    if (recent.size() > 6) recent.pop_front();

    beta_prev = beta;
    beta = y;
    {
      auto bd = beta.data();
      auto gd = at_y.gradient.data();
      for (std::size_t i = 0; i < bd.size(); ++i) bd[i] -= step * gd[i];
    }
    prox_step(beta, problem.lambda * step, problem.penalty);

    if (trace) {
      double dsq = 0.0;
      auto bd = beta.data();
      auto pd = beta_prev.data();
      for (std::size_t i = 0; i < bd.size(); ++i) dsq += (bd[i] - pd[i]) * (bd[i] - pd[i]);
      trace->push_back({eval.loss(beta) +
                            penalty_value(beta.data(), problem.lambda, problem.penalty),
                        dsq, 0.0});
    }

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    {
      const double mom = (t - 1.0) / t_next;
      auto yd = y.data();
      auto bd = beta.data();
      auto pd = beta_prev.data();
      for (std::size_t i = 0; i < yd.size(); ++i)
        yd[i] = bd[i] + mom * (bd[i] - pd[i]);
    }
    t = t_next;

    if (rel_change(beta, beta_prev) < config.tol) {
      LossEvaluation at_beta = eval.loss_and_gradient(beta);
      const double kkt = kkt_residual(beta, at_beta.gradient, problem.lambda,
                                      problem.penalty, L);
      if (kkt < kkt_tol) {
        out.diag.converged = true;
        out.diag.kkt_residual = kkt;
        out.diag.objective =
            at_beta.loss + penalty_value(beta.data(), problem.lambda, problem.penalty);
        ++k;
        break;
      }
    }
  }
  out.diag.iterations = k;
  if (!out.diag.converged) {
    LossEvaluation at_beta = eval.loss_and_gradient(beta);
    out.diag.kkt_residual =
        kkt_residual(beta, at_beta.gradient, problem.lambda, problem.penalty, L);
    out.diag.objective =
        at_beta.loss + penalty_value(beta.data(), problem.lambda, problem.penalty);
  }
  out.beta = std::move(beta);
  return out;
}

SingleFit npg_solve(const SoftMaximinProblem& problem, const NpgConfig& config,
                    const NdArray* warm_start, std::vector<IterationRecord>* trace) {
  problem.validate();
  config.validate();
  const GroupedDataset& data = *problem.data;
  const double kkt_tol = config.kkt_tol * (1.0 + problem.lambda);
  SoftMaximinEvaluator eval(problem.data, problem.zeta);

  NdArray beta = warm_start ? *warm_start : NdArray(data.coefficient_dims());
  if (warm_start && warm_start->size() != data.num_coefficients())
    throw ShapeError("warm start size does not match coefficient count");

  LossEvaluation cur = eval.loss_and_gradient(beta);
  if (!std::isfinite(cur.loss)) throw_nonfinite("npg_solve", 0, {});
  double F = cur.loss + penalty_value(beta.data(), problem.lambda, problem.penalty);

  std::deque<double> window{F};  // objectives of the last M+1 iterates
  std::deque<double> recent{F};
  NdArray beta_prev;
  NdArray grad_prev;
  bool have_prev = false;
  double L_accepted = std::clamp(config.L_init, config.L_min, config.L_max);

  SingleFit out;
  out.diag.kkt_residual = std::numeric_limits<double>::infinity();
  NdArray cand(data.coefficient_dims());
  int k = 0;
  for (; k < config.max_iter; ++k) {
    // Line 2: choose L_k, Barzilai-Borwein from the last two iterates.
    double L = L_accepted;
    if (config.L_init_rule == NpgConfig::InitRule::kBarzilaiBorwein && have_prev) {
      double su = 0.0, ss = 0.0;
      auto bd = beta.data();
      auto pd = beta_prev.data();
      auto gd = cur.gradient.data();
      auto hd = grad_prev.data();
      for (std::size_t i = 0; i < bd.size(); ++i) {
        const double s = bd[i] - pd[i];
        su += s * (gd[i] - hd[i]);
        ss += s * s;
      }
      if (ss > 0.0 && su > 0.0) L = su / ss;
    } else if (config.L_init_rule == NpgConfig::InitRule::kConstant) {
      L = config.L_init;
    }
    L = std::clamp(L, config.L_min, config.L_max);

    const double F_ref = *std::max_element(window.begin(), window.end());
    LossEvaluation at_cand;
    double F_cand = 0.0;
    while (true) {
      // Line 3: proximal step from beta at 1/L.
      {
        auto cd = cand.data();
        auto bd = beta.data();
        auto gd = cur.gradient.data();
        const double step = 1.0 / L;
        for (std::size_t i = 0; i < cd.size(); ++i) cd[i] = bd[i] - step * gd[i];
        prox_step(cand, problem.lambda / L, problem.penalty);
      }
      at_cand = eval.loss_and_gradient(cand);
      if (!std::isfinite(at_cand.loss)) throw_nonfinite("npg_solve", k, recent);
      F_cand = at_cand.loss + penalty_value(cand.data(), problem.lambda, problem.penalty);

      // Line 4: non-monotone sufficient decrease.
      double dist_sq = 0.0;
      {
        auto cd = cand.data();
        auto bd = beta.data();
        for (std::size_t i = 0; i < cd.size(); ++i) {
          const double dlt = cd[i] - bd[i];
          dist_sq += dlt * dlt;
        }
      }
      if (F_cand <= F_ref - 0.5 * config.c * dist_sq) break;
      L *= config.tau;
      ++out.diag.backtracks;
      if (L > config.L_max)
        throw NumericalError(
            "npg_solve: backtracking exceeded L_max at iteration " + std::to_string(k) +
            " (objective " + std::to_string(F_cand) + " vs reference " +
            std::to_string(F_ref) + ")");
    }
    L_accepted = L;
    if (trace) {
      double dsq = 0.0;
      auto cd = cand.data();
      auto bd = beta.data();
      for (std::size_t i = 0; i < cd.size(); ++i) dsq += (cd[i] - bd[i]) * (cd[i] - bd[i]);
      trace->push_back({F_cand, dsq, F_ref});
    }

    const double change = rel_change(cand, beta);
    beta_prev = std::move(beta);
    grad_prev = std::move(cur.gradient);
    have_prev = true;
    beta = cand;
    cur = std::move(at_cand);
    F = F_cand;
    window.push_back(F);
    while (window.size() > static_cast<std::size_t>(config.M) + 1) window.pop_front();
    recent.push_back(F);
    if (recent.size() > 6) recent.pop_front();

    if (change < config.tol) {
      const double kkt =
          kkt_residual(beta, cur.gradient, problem.lambda, problem.penalty, L_accepted);
      if (kkt < kkt_tol) {
        out.diag.converged = true;
        out.diag.kkt_residual = kkt;
        ++k;
        break;
      }
    }
  }
  out.diag.iterations = k;
  out.diag.objective = F;
  if (!out.diag.converged)
    out.diag.kkt_residual =
        kkt_residual(beta, cur.gradient, problem.lambda, problem.penalty, L_accepted);
  out.beta = std::move(beta);
  return out;
}

std::vector<double> lambda_path(const GroupedDataset& data, double zeta, int count,
                                double ratio) {
  if (count < 1) throw PreconditionError("lambda path needs count >= 1");
  if (!(ratio > 0.0 && ratio < 1.0))
    throw PreconditionError("lambda ratio must lie in (0, 1)");
  SoftMaximinEvaluator eval(std::make_shared<GroupedDataset>(data), zeta);
  NdArray zero(data.coefficient_dims());
  const double lmax = max_abs(eval.loss_and_gradient(zero).gradient.data());
  std::vector<double> lambdas(static_cast<std::size_t>(count));
  if (count == 1) {
    lambdas[0] = lmax;
    return lambdas;
  }
  for (int k = 0; k < count; ++k)
    lambdas[static_cast<std::size_t>(k)] = lmax * std::pow(ratio, double(k) / double(count - 1));
  return lambdas;
}

FitResult solve_path(std::shared_ptr<const GroupedDataset> data, double zeta,
                     const std::vector<double>& lambdas, Penalty penalty,
                     SolverKind solver, const NpgConfig& config) {
  if (lambdas.empty()) throw PreconditionError("empty lambda path");
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (!(lambdas[i] < lambdas[i - 1]))
      throw PreconditionError("lambda path must be strictly decreasing");

  FitResult result;
  result.zeta = zeta;
  result.lambdas = lambdas;
  NdArray warm(data->coefficient_dims());
  for (double lambda : lambdas) {
    SoftMaximinProblem prob{data, zeta, lambda, penalty};
    SingleFit fit = solver == SolverKind::kFista ? fista_solve(prob, config, &warm)
                                                 : npg_solve(prob, config, &warm);
    warm = fit.beta;
    result.betas.push_back(std::move(fit.beta));
    result.diagnostics.push_back(fit.diag);
  }
  return result;
}

}  // namespace smx
