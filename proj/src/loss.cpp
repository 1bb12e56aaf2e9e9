#include "smx/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace smx {

void SoftMaximinProblem::validate() const {
  if (!data) throw PreconditionError("problem has no dataset");
  if (!(zeta > 0.0)) throw PreconditionError("zeta must be positive");
  if (lambda < 0.0) throw PreconditionError("lambda must be non-negative");
}

double lse(std::span<const double> x, double zeta) {
  if (x.empty()) throw PreconditionError("lse of an empty vector");
  if (zeta == 0.0) throw PreconditionError("lse requires zeta != 0");
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) {
    if (std::isnan(v)) throw NumericalError("lse: NaN input");
    m = std::max(m, zeta * v);
  }
  double s = 0.0;
  for (double v : x) s += std::exp(zeta * v - m);
  return (m + std::log(s)) / zeta;
}

std::vector<double> softmax_weights(std::span<const double> h, double zeta) {
  if (h.empty()) throw PreconditionError("softmax_weights of an empty vector");
  double m = -std::numeric_limits<double>::infinity();
  for (double v : h) {
    if (std::isnan(v)) throw NumericalError("softmax_weights: NaN input");
    m = std::max(m, zeta * v);
  }
  std::vector<double> w(h.size());
  double s = 0.0;
  for (std::size_t g = 0; g < h.size(); ++g) {
    w[g] = std::exp(zeta * h[g] - m);
    s += w[g];
  }
  for (double& v : w) v /= s;
  return w;
}

namespace {

double general_group_loss(const GroupedDataset& data, std::size_t g, const NdArray& beta) {
  const DenseMatrix& x = data.group_design(g);
  const std::size_t n = x.rows();
  double quad = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double f = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) f += x(r, c) * beta[c];
    quad += f * f;
  }
  const double lin = dot(beta.data(), data.xty(g).data());
  return -(2.0 * lin - quad) / double(n);
}

void check_beta(const GroupedDataset& data, const NdArray& beta) {
  if (beta.size() != data.num_coefficients())
    throw ShapeError("coefficient size " + std::to_string(beta.size()) +
                     " does not match design columns " +
                     std::to_string(data.num_coefficients()));
}

}  // namespace

std::vector<double> SoftMaximinEvaluator::group_losses_shared(const NdArray& beta,
                                                              NdArray* fitted_out) const {
  const GroupedDataset& d = *data_;
  NdArray fitted = d.fitted(beta);
  const double quad = squared_norm(fitted.data());
  const double n = double(d.observed_count());
  const std::size_t G = d.num_groups();
  std::vector<double> h(G);
  for (std::size_t g = 0; g < G; ++g)
    h[g] = -(2.0 * dot(beta.data(), d.xty(g).data()) - quad) / n;
  if (fitted_out) *fitted_out = std::move(fitted);
  return h;
}

SoftMaximinEvaluator::SoftMaximinEvaluator(std::shared_ptr<const GroupedDataset> data,
                                           double zeta)
    : data_(std::move(data)), zeta_(zeta) {
  if (!data_) throw PreconditionError("evaluator has no dataset");
}

std::vector<double> SoftMaximinEvaluator::losses(const NdArray& beta) const {
  check_beta(*data_, beta);
  if (data_->is_shared()) return group_losses_shared(beta, nullptr);
  std::vector<double> h(data_->num_groups());
  for (std::size_t g = 0; g < h.size(); ++g) h[g] = general_group_loss(*data_, g, beta);
  return h;
}

double SoftMaximinEvaluator::loss(const NdArray& beta) const {
  return lse(losses(beta), zeta_);
}

LossEvaluation SoftMaximinEvaluator::loss_and_gradient(const NdArray& beta) const {
  check_beta(*data_, beta);
  const GroupedDataset& d = *data_;
  LossEvaluation out;

  if (d.is_shared()) {
    NdArray fitted;
    out.group_h = group_losses_shared(beta, &fitted);
    out.loss = lse(out.group_h, zeta_);
    out.weights = softmax_weights(out.group_h, zeta_);

    // grad = -(2/n) (sum_g w_g X^T y_g - X^T X beta); the first term is a
    // p x G matrix-vector product against the cached X^T y columns.
    const double n = double(d.observed_count());
    const std::size_t p = d.num_coefficients();
    NdArray grad(d.coefficient_dims());
    const DenseMatrix& xty = d.xty_matrix();
    for (std::size_t g = 0; g < out.weights.size(); ++g) {
      const double w = out.weights[g];
      if (w == 0.0) continue;
      const double* col = xty.data().data() + p * g;
      for (std::size_t i = 0; i < p; ++i) grad[i] += w * col[i];
    }
    NdArray xtxb = design_tmatvec(d.design(), fitted);
    for (std::size_t i = 0; i < p; ++i) grad[i] = -(2.0 / n) * (grad[i] - xtxb[i]);
    out.gradient = std::move(grad);
    return out;
  }

  const std::size_t G = d.num_groups();
  out.group_h.resize(G);
  for (std::size_t g = 0; g < G; ++g) out.group_h[g] = general_group_loss(d, g, beta);
  out.loss = lse(out.group_h, zeta_);
  out.weights = softmax_weights(out.group_h, zeta_);

  const std::size_t p = d.num_coefficients();
  NdArray grad(d.coefficient_dims());
  for (std::size_t g = 0; g < G; ++g) {
    const double w = out.weights[g];
    if (w == 0.0) continue;
    const DenseMatrix& x = d.group_design(g);
    const std::size_t n = x.rows();
    // residual r = y_g - X_g beta, contribution -2 w X_g^T r / n_g
    std::vector<double> r(n);
    const NdArray& y = d.response(g);
    for (std::size_t i = 0; i < n; ++i) {
      double f = 0.0;
      for (std::size_t c = 0; c < p; ++c) f += x(i, c) * beta[c];
      r[i] = y[i] - f;
    }
    const double scale = -2.0 * w / double(n);
    for (std::size_t c = 0; c < p; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += x(i, c) * r[i];
      grad[c] += scale * s;
    }
  }
  out.gradient = std::move(grad);
  return out;
}

double explained_variance(const GroupedDataset& data, std::size_t g, const NdArray& beta) {
  check_beta(data, beta);
  if (g >= data.num_groups()) throw PreconditionError("group index out of range");
  if (data.is_shared()) {
    NdArray fitted = data.fitted(beta);
    const double quad = squared_norm(fitted.data());
    const double n = double(data.observed_count());
    return (2.0 * dot(beta.data(), data.xty(g).data()) - quad) / n;
  }
  return -general_group_loss(data, g, beta);
}

std::vector<double> group_losses(const GroupedDataset& data, const NdArray& beta) {
  SoftMaximinEvaluator ev(std::make_shared<GroupedDataset>(data), 1.0);
  return ev.losses(beta);
}

double softmaximin_loss(const SoftMaximinProblem& problem, const NdArray& beta) {
  problem.validate();
  SoftMaximinEvaluator ev(problem.data, problem.zeta);
  return ev.loss(beta);
}

NdArray softmaximin_gradient(const SoftMaximinProblem& problem, const NdArray& beta) {
  problem.validate();
  SoftMaximinEvaluator ev(problem.data, problem.zeta);
  return ev.loss_and_gradient(beta).gradient;
}

DenseMatrix softmaximin_hessian(const SoftMaximinProblem& problem, const NdArray& beta) {
  problem.validate();
  const GroupedDataset& d = *problem.data;
  check_beta(d, beta);
  const std::size_t p = d.num_coefficients();
  if (p > 200)
    throw CapabilityError("softmaximin_hessian is a diagnostic, guarded to p <= 200 (got " +
                          std::to_string(p) + ")");
  const std::size_t G = d.num_groups();

  SoftMaximinEvaluator ev(problem.data, problem.zeta);
  const std::vector<double> h = ev.losses(beta);
  const std::vector<double> w = softmax_weights(h, problem.zeta);

  // Per-group gradients.
  std::vector<std::vector<double>> gh(G, std::vector<double>(p, 0.0));
  if (d.is_shared()) {
    NdArray fitted = d.fitted(beta);
    NdArray xtxb = design_tmatvec(d.design(), fitted);
    const double n = double(d.observed_count());
    for (std::size_t g = 0; g < G; ++g)
      for (std::size_t i = 0; i < p; ++i)
        gh[g][i] = -2.0 * (d.xty(g)[i] - xtxb[i]) / n;
  } else {
    for (std::size_t g = 0; g < G; ++g) {
      const DenseMatrix& x = d.group_design(g);
      const NdArray& y = d.response(g);
      const std::size_t n = x.rows();
      std::vector<double> r(n);
      for (std::size_t i = 0; i < n; ++i) {
        double f = 0.0;
        for (std::size_t c = 0; c < p; ++c) f += x(i, c) * beta[c];
        r[i] = y[i] - f;
      }
      for (std::size_t c = 0; c < p; ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x(i, c) * r[i];
        gh[g][c] = -2.0 * s / double(n);
      }
    }
  }

  DenseMatrix hess(p, p);
  // Pairwise rank-one part. Differentiating the weights produces a zeta
  // factor here (the gradient of w_{g,zeta} is zeta w_g (grad h_g - grad s)),
  // which the finite-difference oracle confirms.
  std::vector<double> diff(p);
  for (std::size_t i = 0; i < G; ++i) {
    for (std::size_t j = i + 1; j < G; ++j) {
      const double wij = problem.zeta * w[i] * w[j];
      if (wij == 0.0) continue;
      for (std::size_t c = 0; c < p; ++c) diff[c] = gh[i][c] - gh[j][c];
      for (std::size_t c2 = 0; c2 < p; ++c2)
        for (std::size_t c1 = 0; c1 < p; ++c1)
          hess(c1, c2) += wij * diff[c1] * diff[c2];
    }
  }
  // Weighted group Hessians, 2 X_g^T X_g / n_g.
  if (d.is_shared()) {
    // X^T X is the Kronecker product of the factor Grams; identical across
    // groups so the weights sum to one.
    const auto& factors = d.design().factors();
    std::vector<DenseMatrix> grams;
    grams.reserve(factors.size());
    for (const auto& f : factors) grams.push_back(gram_matrix(f));
    const double n = double(d.observed_count());
    const auto cols = d.design().col_dims();
    // Entry (a, b) of the Kronecker product with column-major multi-indexing.
    std::vector<std::size_t> ia(cols.size()), ib(cols.size());
    for (std::size_t a = 0; a < p; ++a) {
      std::size_t ra = a;
      for (std::size_t k = 0; k < cols.size(); ++k) {
        ia[k] = ra % cols[k];
        ra /= cols[k];
      }
      for (std::size_t b = 0; b < p; ++b) {
        std::size_t rb = b;
        for (std::size_t k = 0; k < cols.size(); ++k) {
          ib[k] = rb % cols[k];
          rb /= cols[k];
        }
        double v = 1.0;
        for (std::size_t k = 0; k < cols.size(); ++k) v *= grams[k](ia[k], ib[k]);
        hess(a, b) += 2.0 * v / n;
      }
    }
  } else {
    for (std::size_t g = 0; g < G; ++g) {
      if (w[g] == 0.0) continue;
      const DenseMatrix& x = d.group_design(g);
      const double scale = 2.0 * w[g] / double(x.rows());
      for (std::size_t c2 = 0; c2 < p; ++c2)
        for (std::size_t c1 = 0; c1 < p; ++c1) {
          double s = 0.0;
          for (std::size_t i = 0; i < x.rows(); ++i) s += x(i, c1) * x(i, c2);
          hess(c1, c2) += scale * s;
        }
    }
  }
  return hess;
}

double lipschitz_bound(const GroupedDataset& data, double pairwise_scale) {
  if (!data.is_shared())
    throw CapabilityError("lipschitz_bound requires an identical design across groups");
  if (!(pairwise_scale > 0.0))
    throw PreconditionError("pairwise_scale must be positive");
  const double n = double(data.observed_count());
  const double L = 2.0 * gram_spectral_norm(data.design()) / n;
  return L * (1.0 + pairwise_scale * (2.0 / n) * data.pairwise_response_distance_sum());
}

}  // namespace smx
