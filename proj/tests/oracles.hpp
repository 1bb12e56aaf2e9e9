// Independent reference implementations used only by tests: a dense Kronecker
// route for the tensor kernels, finite differences for gradients/Hessians,
// Eigen eigen/least-squares solves, a textbook Cox-de Boor recursion, and
// brute-force grid searches. None of them share code with the library paths
// they check.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "smx/dataset.hpp"
#include "smx/loss.hpp"
#include "smx/tensor_design.hpp"

namespace oracle {

inline Eigen::MatrixXd to_eigen(const smx::DenseMatrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) out(long(i), long(j)) = m(i, j);
  return out;
}

/// Dense Phi = F_d (x) ... (x) F_1.
inline Eigen::MatrixXd dense_kronecker(const smx::TensorDesign& design) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(1, 1);
  for (const auto& f : design.factors()) {
    const Eigen::MatrixXd fe = to_eigen(f);
    Eigen::MatrixXd next(fe.rows() * acc.rows(), fe.cols() * acc.cols());
    for (long i = 0; i < fe.rows(); ++i)
      for (long j = 0; j < fe.cols(); ++j)
        next.block(i * acc.rows(), j * acc.cols(), acc.rows(), acc.cols()) = fe(i, j) * acc;
    acc = next;
  }
  return acc;
}

inline Eigen::VectorXd to_vec(const smx::NdArray& a) {
  Eigen::VectorXd v(long(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[long(i)] = a[i];
  return v;
}

inline double rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  const double denom = std::max(1e-300, want.norm());
  return (got - want).norm() / denom;
}

/// Central finite-difference gradient of a scalar function.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd e = x;
  for (long i = 0; i < x.size(); ++i) {
    e[i] = x[i] + h;
    const double up = f(e);
    e[i] = x[i] - h;
    const double dn = f(e);
    e[i] = x[i];
    g[i] = (up - dn) / (2.0 * h);
  }
  return g;
}

/// Central finite-difference Hessian.
inline Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                                  const Eigen::VectorXd& x, double h = 1e-4) {
  const long p = x.size();
  Eigen::MatrixXd out(p, p);
  Eigen::VectorXd e = x;
  const double f0 = f(x);
  for (long i = 0; i < p; ++i) {
    for (long j = i; j < p; ++j) {
      double v;
      if (i == j) {
        e[i] = x[i] + h;
        const double fp = f(e);
        e[i] = x[i] - h;
        const double fm = f(e);
        e[i] = x[i];
        v = (fp - 2.0 * f0 + fm) / (h * h);
      } else {
        e[i] = x[i] + h;
        e[j] = x[j] + h;
        const double fpp = f(e);
        e[j] = x[j] - h;
        const double fpm = f(e);
        e[i] = x[i] - h;
        const double fmm = f(e);
        e[j] = x[j] + h;
        const double fmp = f(e);
        e[i] = x[i];
        e[j] = x[j];
        v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
      }
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

/// Textbook Cox-de Boor recursion, directly from the two-term definition.
inline double cox_de_boor(const std::vector<double>& knots, int m, int degree, double x,
                          double right_end) {
  if (degree == 0) {
    const bool last = knots[m + 1] >= right_end;
    if (last ? (x >= knots[m] && x <= knots[m + 1]) : (x >= knots[m] && x < knots[m + 1]))
      return knots[m] < knots[m + 1] ? 1.0 : 0.0;
    return 0.0;
  }
  double left = 0.0, right = 0.0;
  const double dl = knots[m + degree] - knots[m];
  if (dl > 0.0) left = (x - knots[m]) / dl * cox_de_boor(knots, m, degree - 1, x, right_end);
  const double dr = knots[m + degree + 1] - knots[m + 1];
  if (dr > 0.0)
    right = (knots[m + degree + 1] - x) / dr * cox_de_boor(knots, m + 1, degree - 1, x, right_end);
  return left + right;
}

/// Random helpers with a fixed engine type so tests are reproducible.
inline std::mt19937_64 engine(std::uint64_t seed) { return std::mt19937_64(seed); }

inline smx::DenseMatrix random_matrix(std::mt19937_64& rng, std::size_t rows,
                                      std::size_t cols, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  smx::DenseMatrix m(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

inline smx::NdArray random_array(std::mt19937_64& rng, std::vector<std::size_t> dims,
                                 double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  smx::NdArray a(std::move(dims));
  for (double& v : a.data()) v = n(rng);
  return a;
}

/// Small random shared-design dataset for solver/loss tests.
inline smx::GroupedDataset random_shared_dataset(std::mt19937_64& rng, std::size_t n1,
                                                 std::size_t n2, std::size_t p1,
                                                 std::size_t p2, std::size_t groups) {
  std::vector<smx::DenseMatrix> factors;
  factors.push_back(random_matrix(rng, n1, p1));
  factors.push_back(random_matrix(rng, n2, p2));
  smx::TensorDesign design(std::move(factors));
  std::vector<smx::NdArray> ys;
  for (std::size_t g = 0; g < groups; ++g)
    ys.push_back(random_array(rng, {n1, n2}));
  return smx::GroupedDataset::shared(std::move(design), std::move(ys));
}

inline smx::GroupedDataset random_general_dataset(std::mt19937_64& rng, std::size_t n,
                                                  std::size_t p, std::size_t groups) {
  std::vector<smx::DenseMatrix> xs;
  std::vector<smx::NdArray> ys;
  for (std::size_t g = 0; g < groups; ++g) {
    xs.push_back(random_matrix(rng, n, p));
    ys.push_back(random_array(rng, {n}));
  }
  return smx::GroupedDataset::general(std::move(xs), std::move(ys));
}

/// Loss value through the dense route only (no library kernels).
inline double dense_softmaximin_loss(const Eigen::MatrixXd& phi,
                                     const std::vector<Eigen::VectorXd>& ys,
                                     const Eigen::VectorXd& beta, double zeta) {
  const double n = double(phi.rows());
  std::vector<double> h(ys.size());
  const Eigen::VectorXd fit = phi * beta;
  for (std::size_t g = 0; g < ys.size(); ++g)
    h[g] = -(2.0 * fit.dot(ys[g]) - fit.squaredNorm()) / n;
  double m = -std::numeric_limits<double>::infinity();
  for (double v : h) m = std::max(m, zeta * v);
  double s = 0.0;
  for (double v : h) s += std::exp(zeta * v - m);
  return (m + std::log(s)) / zeta;
}

}  // namespace oracle
