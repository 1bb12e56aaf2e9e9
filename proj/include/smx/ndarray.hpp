#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "smx/errors.hpp"

namespace smx {

/// Dense n-dimensional array of doubles in column-major order (first index
/// fastest). Rank 1 covers plain vectors. Immutable sizes; the buffer is
/// mutable through data().
class NdArray {
 public:
  NdArray() = default;

  /// Zero-filled array with the given extents.
  explicit NdArray(std::vector<std::size_t> dims);

  NdArray(std::vector<std::size_t> dims, std::vector<double> data);

  static NdArray vector(std::vector<double> values);

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t rank() const { return dims_.size(); }
  std::size_t size() const { return data_.size(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  double operator[](std::size_t flat) const { return data_[flat]; }
  double& operator[](std::size_t flat) { return data_[flat]; }

  /// Column-major flat offset of a multi-index (sized like dims()).
  std::size_t offset(std::span<const std::size_t> index) const;

  double at(std::initializer_list<std::size_t> index) const;
  double& at(std::initializer_list<std::size_t> index);

  bool same_dims(const NdArray& other) const { return dims_ == other.dims_; }

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> data_;
};

/// Dense column-major matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i + rows_ * j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i + rows_ * j]; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  DenseMatrix transposed() const;

  static DenseMatrix identity(std::size_t n);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

std::size_t checked_product(std::span<const std::size_t> dims);

std::string dims_to_string(std::span<const std::size_t> dims);

// Small vector helpers shared by the numeric modules.
double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
double max_abs(std::span<const double> a);
/// out += scale * a
void axpy(double scale, std::span<const double> a, std::span<double> out);

}  // namespace smx
