#pragma once

#include <span>
#include <vector>

#include "smx/ndarray.hpp"

namespace smx {

/// B-spline system on a closed interval with clamped uniform knots: the
/// boundary knots are repeated degree+1 times and the num_basis - degree - 1
/// interior knots are equally spaced.
struct BSplineSpec {
  int degree = 3;
  int num_basis = 0;
  double a = 0.0;
  double b = 1.0;
};

/// Fourier system: column 1 is the constant 1/sqrt(period); columns 2k and
/// 2k+1 are sqrt(2/period) * sin respectively cos of 2*pi*k*x/period.
struct FourierSpec {
  int num_basis = 0;
  double period = 1.0;
};

/// Clamped knot vector of length num_basis + degree + 1.
std::vector<double> bspline_knots(const BSplineSpec& spec);

/// Marginal design matrix (i, m) = value of the m-th B-spline at points[i].
/// Points must be strictly increasing and inside [a, b].
DenseMatrix bspline_design(const BSplineSpec& spec, std::span<const double> points);

/// Values of all num_basis B-splines at one point.
std::vector<double> bspline_eval(const BSplineSpec& spec, double x);

/// Marginal Fourier design matrix.
DenseMatrix fourier_design(const FourierSpec& spec, std::span<const double> points);

/// Value of the j-th Fourier basis function (1-based index) at x.
double fourier_eval(const FourierSpec& spec, int j, double x);

}  // namespace smx
