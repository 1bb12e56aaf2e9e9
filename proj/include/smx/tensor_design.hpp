#pragma once

#include <vector>

#include "smx/ndarray.hpp"

namespace smx {

/// Kronecker-structured design: factors [F_1, ..., F_d] implicitly represent
/// Phi = F_d (x) ... (x) F_1 acting on column-major vec() of coefficient
/// arrays. 1 <= d <= 3. The full matrix is never materialized.
class TensorDesign {
 public:
  explicit TensorDesign(std::vector<DenseMatrix> factors);

  const std::vector<DenseMatrix>& factors() const { return factors_; }
  std::size_t order() const { return factors_.size(); }

  std::vector<std::size_t> row_dims() const;  // (n_1, ..., n_d)
  std::vector<std::size_t> col_dims() const;  // (p_1, ..., p_d)
  std::size_t total_rows() const;
  std::size_t total_cols() const;

 private:
  std::vector<DenseMatrix> factors_;
};

/// Rotated H-transform: contracts the first mode of `a` with `m` and rotates
/// the result so the new mode ends up last. For dims(a) = (q, r_2, ..., r_d)
/// and m of shape n x q the result has dims (r_2, ..., r_d, n) with
///   out[j_2, ..., j_d, i] = sum_k m(i, k) * a[k, j_2, ..., j_d].
NdArray rho(const DenseMatrix& m, const NdArray& a);

/// Same contraction against m^T (shape of m is n x q, `a` has first extent n,
/// result last extent q). Avoids materializing the transpose.
NdArray rho_transposed(const DenseMatrix& m, const NdArray& a);

/// Phi * vec(theta), reshaped to the row grid (n_1, ..., n_d).
NdArray design_matvec(const TensorDesign& design, const NdArray& theta);

/// Phi^T * vec(r), reshaped to the column grid (p_1, ..., p_d).
NdArray design_tmatvec(const TensorDesign& design, const NdArray& r);

/// ||Phi^T Phi||_2 = prod_j ||F_j^T F_j||_2, each factor norm obtained by
/// power iteration on the factor Gram matrix (relative tolerance 1e-10,
/// at most 10000 iterations).
double gram_spectral_norm(const TensorDesign& design);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
/// Throws NumericalError when the iteration fails to settle.
double power_iteration_sym(const DenseMatrix& sym, double rel_tol = 1e-10,
                           int max_iter = 10000);

/// Gram matrix F^T F of a dense factor.
DenseMatrix gram_matrix(const DenseMatrix& f);

/// Smallest eigenvalue of a symmetric PSD matrix, via power iteration on the
/// spectrally shifted complement (s*I - A with s = ||A||_2).
double min_eigenvalue_sym(const DenseMatrix& sym);

}  // namespace smx
