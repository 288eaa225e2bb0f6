#pragma once

#include <cstddef>
#include <stdexcept>

#include "odl/numerics/matrix.hpp"

namespace odl::numerics {

class NotPositiveDefinite : public std::runtime_error {
 public:
  NotPositiveDefinite(std::size_t pivot, double value);
  std::size_t pivot() const { return pivot_; }
  double value() const { return value_; }

 private:
  std::size_t pivot_;
  double value_;
};

// Lower-triangular L with a == L·Lᵀ. Pivots at or below a relative noise
// floor (n·eps·max diagonal) are rejected as not positive definite.
Matrix<double> cholesky(const Matrix<double>& a);

// Solves a·X == b for symmetric positive definite a.
Matrix<double> solve_spd(const Matrix<double>& a, const Matrix<double>& b);

Matrix<double> invert_spd(const Matrix<double>& a);

}  // namespace odl::numerics
