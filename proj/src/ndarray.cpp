#include "smx/ndarray.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace smx {

std::size_t checked_product(std::span<const std::size_t> dims) {
  std::size_t p = 1;
  for (std::size_t d : dims) {
    if (d == 0) throw ShapeError("array extent must be >= 1");
    if (d != 0 && p > std::numeric_limits<std::size_t>::max() / d)
      throw ShapeError("array size overflows size_t");
    p *= d;
  }
  return p;
}

std::string dims_to_string(std::span<const std::size_t> dims) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) os << ", ";
    os << dims[i];
  }
  os << ")";
  return os.str();
}

NdArray::NdArray(std::vector<std::size_t> dims)
    : dims_(std::move(dims)), data_(checked_product(dims_), 0.0) {
  if (dims_.empty()) throw ShapeError("array rank must be >= 1");
}

NdArray::NdArray(std::vector<std::size_t> dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  if (dims_.empty()) throw ShapeError("array rank must be >= 1");
  const std::size_t expect = checked_product(dims_);
  if (expect != data_.size())
    throw ShapeError("array data length " + std::to_string(data_.size()) +
                     " does not match dims " + dims_to_string(dims_));
}

NdArray NdArray::vector(std::vector<double> values) {
  std::vector<std::size_t> dims{values.size()};
  return NdArray(std::move(dims), std::move(values));
}

std::size_t NdArray::offset(std::span<const std::size_t> index) const {
  if (index.size() != dims_.size())
    throw ShapeError("index rank " + std::to_string(index.size()) +
                     " does not match array rank " + std::to_string(dims_.size()));
  std::size_t off = 0, stride = 1;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (index[k] >= dims_[k])
      throw ShapeError("index out of range along axis " + std::to_string(k));
    off += index[k] * stride;
    stride *= dims_[k];
  }
  return off;
}

double NdArray::at(std::initializer_list<std::size_t> index) const {
  std::vector<std::size_t> idx(index);
  return data_[offset(idx)];
}

double& NdArray::at(std::initializer_list<std::size_t> index) {
  std::vector<std::size_t> idx(index);
  return data_[offset(idx)];
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
  if (rows == 0 || cols == 0) throw ShapeError("matrix extents must be >= 1");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0) throw ShapeError("matrix extents must be >= 1");
  if (rows * cols != data_.size())
    throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                     " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t j = 0; j < cols_; ++j)
    for (std::size_t i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
  return t;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

void axpy(double scale, std::span<const double> a, std::span<double> out) {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += scale * a[i];
}

}  // namespace smx
