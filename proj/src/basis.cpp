#include "smx/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace smx {

namespace {

void validate(const BSplineSpec& spec) {
  if (spec.degree < 0) throw PreconditionError("b-spline degree must be >= 0");
  if (spec.num_basis <= spec.degree)
    throw PreconditionError("num_basis (" + std::to_string(spec.num_basis) +
                            ") must exceed degree (" + std::to_string(spec.degree) + ")");
  if (!(spec.a < spec.b)) throw PreconditionError("b-spline domain must satisfy a < b");
}

}  // namespace

std::vector<double> bspline_knots(const BSplineSpec& spec) {
  validate(spec);
  const int q = spec.degree;
  const int p = spec.num_basis;
  const int interior = p - q - 1;
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(p + q + 1));
  for (int i = 0; i <= q; ++i) knots.push_back(spec.a);
  for (int i = 1; i <= interior; ++i)
    knots.push_back(spec.a + (spec.b - spec.a) * double(i) / double(interior + 1));
  for (int i = 0; i <= q; ++i) knots.push_back(spec.b);
  return knots;
}

std::vector<double> bspline_eval(const BSplineSpec& spec, double x) {
  validate(spec);
  if (x < spec.a || x > spec.b)
    throw DomainError("b-spline evaluation point " + std::to_string(x) + " outside [" +
                      std::to_string(spec.a) + ", " + std::to_string(spec.b) + "]");
  const auto knots = bspline_knots(spec);
  const int q = spec.degree;
  const int p = spec.num_basis;

  // Knot span index: largest i with knots[i] <= x < knots[i+1], clamped so the
  // right endpoint lands in the last non-empty span.
  int span = q;
  {
    const int hi = p - 1;  // last valid span start
    auto it = std::upper_bound(knots.begin() + q, knots.begin() + p + 1, x);
    span = int(it - knots.begin()) - 1;
    span = std::clamp(span, q, hi);
  }

  // Local Cox-de Boor triangle (de Boor's basis-funs): values of the q+1
  // splines that are nonzero on the span.
  std::vector<double> local(static_cast<std::size_t>(q) + 1, 0.0);
  std::vector<double> left(static_cast<std::size_t>(q) + 1, 0.0);
  std::vector<double> right(static_cast<std::size_t>(q) + 1, 0.0);
  local[0] = 1.0;
  for (int j = 1; j <= q; ++j) {
    left[j] = x - knots[span + 1 - j];
    right[j] = knots[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double den = right[r + 1] + left[j - r];
      const double temp = den == 0.0 ? 0.0 : local[r] / den;
      local[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    local[j] = saved;
  }

  std::vector<double> out(static_cast<std::size_t>(p), 0.0);
  for (int r = 0; r <= q; ++r) {
    const int idx = span - q + r;
    if (idx >= 0 && idx < p) out[static_cast<std::size_t>(idx)] = local[r];
  }
  return out;
}

DenseMatrix bspline_design(const BSplineSpec& spec, std::span<const double> points) {
  validate(spec);
  if (points.empty()) throw PreconditionError("b-spline design needs at least one point");
  for (std::size_t i = 1; i < points.size(); ++i)
    if (!(points[i - 1] < points[i]))
      throw PreconditionError("b-spline evaluation points must be strictly increasing");
  DenseMatrix m(points.size(), static_cast<std::size_t>(spec.num_basis));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto vals = bspline_eval(spec, points[i]);
    for (std::size_t c = 0; c < vals.size(); ++c) m(i, c) = vals[c];
  }
  return m;
}

double fourier_eval(const FourierSpec& spec, int j, double x) {
  if (spec.num_basis < 1) throw PreconditionError("fourier num_basis must be >= 1");
  if (spec.period <= 0.0) throw PreconditionError("fourier period must be positive");
  if (j < 1 || j > spec.num_basis)
    throw PreconditionError("fourier basis index out of range: " + std::to_string(j));
  if (j == 1) return 1.0 / std::sqrt(spec.period);
  const int k = j / 2;  // j = 2k -> sin, j = 2k+1 -> cos
  const double arg = 2.0 * std::numbers::pi * double(k) * x / spec.period;
  const double amp = std::sqrt(2.0 / spec.period);
  return amp * (j % 2 == 0 ? std::sin(arg) : std::cos(arg));
}

DenseMatrix fourier_design(const FourierSpec& spec, std::span<const double> points) {
  if (spec.num_basis < 1) throw PreconditionError("fourier num_basis must be >= 1");
  if (spec.period <= 0.0) throw PreconditionError("fourier period must be positive");
  DenseMatrix m(points.size(), static_cast<std::size_t>(spec.num_basis));
  for (std::size_t i = 0; i < points.size(); ++i)
    for (int j = 1; j <= spec.num_basis; ++j)
      m(i, static_cast<std::size_t>(j - 1)) = fourier_eval(spec, j, points[i]);
  return m;
}

}  // namespace smx
