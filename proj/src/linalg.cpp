#include "odl/numerics/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace odl::numerics {

NotPositiveDefinite::NotPositiveDefinite(std::size_t pivot, double value)
    : std::runtime_error("matrix is not positive definite: pivot " + std::to_string(pivot) +
                         " has value " + std::to_string(value)),
      pivot_(pivot),
      value_(value) {}

Matrix<double> cholesky(const Matrix<double>& a) {
  if (a.rows() != a.cols()) throw DimensionError("cholesky: matrix is not square");
  const std::size_t n = a.rows();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
  const double floor =
      static_cast<double>(n) * std::numeric_limits<double>::epsilon() * std::max(max_diag, 1e-300);

  Matrix<double> l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > floor)) throw NotPositiveDefinite(j, d);
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

Matrix<double> solve_spd(const Matrix<double>& a, const Matrix<double>& b) {
  if (a.rows() != b.rows()) throw DimensionError("solve_spd: right-hand side row mismatch");
  const Matrix<double> l = cholesky(a);
  const std::size_t n = a.rows();
  Matrix<double> x = b;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    // L·y = b
    for (std::size_t i = 0; i < n; ++i) {
      double s = x(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, c);
      x(i, c) = s / l(i, i);
    }
    // Lᵀ·x = y
    for (std::size_t i = n; i-- > 0;) {
      double s = x(i, c);
      for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x(k, c);
      x(i, c) = s / l(i, i);
    }
  }
  return x;
}

Matrix<double> invert_spd(const Matrix<double>& a) {
  Matrix<double> inv = solve_spd(a, Matrix<double>::identity(a.rows()));
  for (std::size_t i = 0; i < inv.rows(); ++i)
    for (std::size_t j = i + 1; j < inv.cols(); ++j) {
      const double s = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = s;
      inv(j, i) = s;
    }
  return inv;
}

}  // namespace odl::numerics
