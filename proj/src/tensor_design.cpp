#include "smx/tensor_design.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace smx {

namespace {

using MatMap = Eigen::Map<const Eigen::MatrixXd>;
using MutMap = Eigen::Map<Eigen::MatrixXd>;

}  // namespace

TensorDesign::TensorDesign(std::vector<DenseMatrix> factors) : factors_(std::move(factors)) {
  if (factors_.empty() || factors_.size() > 3)
    throw ShapeError("tensor design order must be between 1 and 3, got " +
                     std::to_string(factors_.size()));
}

std::vector<std::size_t> TensorDesign::row_dims() const {
  std::vector<std::size_t> d;
  d.reserve(factors_.size());
  for (const auto& f : factors_) d.push_back(f.rows());
  return d;
}

std::vector<std::size_t> TensorDesign::col_dims() const {
  std::vector<std::size_t> d;
  d.reserve(factors_.size());
  for (const auto& f : factors_) d.push_back(f.cols());
  return d;
}

std::size_t TensorDesign::total_rows() const {
  std::size_t n = 1;
  for (const auto& f : factors_) n *= f.rows();
  return n;
}

std::size_t TensorDesign::total_cols() const {
  std::size_t p = 1;
  for (const auto& f : factors_) p *= f.cols();
  return p;
}

NdArray rho(const DenseMatrix& m, const NdArray& a) {
  const std::size_t q = a.dims()[0];
  if (q != m.cols())
    throw ShapeError("rho: first extent of array (" + std::to_string(q) +
                     ") does not match matrix columns (" + std::to_string(m.cols()) +
                     "), array dims " + dims_to_string(a.dims()));
  const std::size_t rest = a.size() / q;
  std::vector<std::size_t> out_dims(a.dims().begin() + 1, a.dims().end());
  out_dims.push_back(m.rows());
  NdArray out(std::move(out_dims));

  // unfold_1(a) is the q x rest buffer itself (column-major); the rotated
  // result is its transpose times m^T, again column-major.
  MatMap am(a.data().data(), static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(rest));
  MatMap mm(m.data().data(), static_cast<Eigen::Index>(m.rows()),
            static_cast<Eigen::Index>(m.cols()));
  MutMap om(out.data().data(), static_cast<Eigen::Index>(rest),
            static_cast<Eigen::Index>(m.rows()));
  om.noalias() = am.transpose() * mm.transpose();
  return out;
}

NdArray rho_transposed(const DenseMatrix& m, const NdArray& a) {
  const std::size_t n = a.dims()[0];
  if (n != m.rows())
    throw ShapeError("rho_transposed: first extent of array (" + std::to_string(n) +
                     ") does not match matrix rows (" + std::to_string(m.rows()) +
                     "), array dims " + dims_to_string(a.dims()));
  const std::size_t rest = a.size() / n;
  std::vector<std::size_t> out_dims(a.dims().begin() + 1, a.dims().end());
  out_dims.push_back(m.cols());
  NdArray out(std::move(out_dims));

  MatMap am(a.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rest));
  MatMap mm(m.data().data(), static_cast<Eigen::Index>(m.rows()),
            static_cast<Eigen::Index>(m.cols()));
  MutMap om(out.data().data(), static_cast<Eigen::Index>(rest),
            static_cast<Eigen::Index>(m.cols()));
  om.noalias() = am.transpose() * mm;
  return out;
}

NdArray design_matvec(const TensorDesign& design, const NdArray& theta) {
  const auto cols = design.col_dims();
  if (theta.dims() != cols)
    throw ShapeError("design_matvec: coefficient dims " + dims_to_string(theta.dims()) +
                     " do not match design column grid " + dims_to_string(cols));
  NdArray cur = theta;
  for (const auto& f : design.factors()) cur = rho(f, cur);
  return cur;
}

NdArray design_tmatvec(const TensorDesign& design, const NdArray& r) {
  const auto rows = design.row_dims();
  if (r.dims() != rows)
    throw ShapeError("design_tmatvec: array dims " + dims_to_string(r.dims()) +
                     " do not match design row grid " + dims_to_string(rows));
  NdArray cur = r;
  for (const auto& f : design.factors()) cur = rho_transposed(f, cur);
  return cur;
}

DenseMatrix gram_matrix(const DenseMatrix& f) {
  DenseMatrix g(f.cols(), f.cols());
  MatMap fm(f.data().data(), static_cast<Eigen::Index>(f.rows()),
            static_cast<Eigen::Index>(f.cols()));
  MutMap gm(g.data().data(), static_cast<Eigen::Index>(f.cols()),
            static_cast<Eigen::Index>(f.cols()));
  gm.noalias() = fm.transpose() * fm;
  return g;
}

double power_iteration_sym(const DenseMatrix& sym, double rel_tol, int max_iter) {
  if (sym.rows() != sym.cols()) throw ShapeError("power iteration requires a square matrix");
  const std::size_t p = sym.rows();
  MatMap am(sym.data().data(), static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));

  // Deterministic start with a mild ramp so it is never orthogonal to the
  // leading eigenvector of a structured matrix.
  Eigen::VectorXd v(p);
  for (std::size_t i = 0; i < p; ++i) v[static_cast<Eigen::Index>(i)] = 1.0 + 0.5 * double(i) / double(p);
  v.normalize();

  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd w = am * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;  // zero matrix
    v = w / norm;
    const double next = v.dot(am * v);
    if (it > 0 && std::abs(next - lambda) <= rel_tol * std::max(1.0, std::abs(next)))
      return next;
    lambda = next;
  }
  throw NumericalError("power iteration did not converge in " + std::to_string(max_iter) +
                       " iterations, last eigenvalue estimate " + std::to_string(lambda));
}

double gram_spectral_norm(const TensorDesign& design) {
  double prod = 1.0;
  for (const auto& f : design.factors()) prod *= power_iteration_sym(gram_matrix(f));
  return prod;
}

double min_eigenvalue_sym(const DenseMatrix& sym) {
  const double top = power_iteration_sym(sym);
  if (top == 0.0) return 0.0;
  DenseMatrix shifted(sym.rows(), sym.cols());
  for (std::size_t j = 0; j < sym.cols(); ++j)
    for (std::size_t i = 0; i < sym.rows(); ++i)
      shifted(i, j) = (i == j ? top : 0.0) - sym(i, j);
  return top - power_iteration_sym(shifted);
}

}  // namespace smx
