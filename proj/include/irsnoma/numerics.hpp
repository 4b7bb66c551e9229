#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "irsnoma/rng.hpp"

namespace irsnoma {

using cdouble = std::complex<double>;
using ComplexVector = std::vector<cdouble>;

// Dense row-major complex matrix. Sizes in this project never exceed a few
// dozen rows, so the class favours clarity over blocking or SIMD.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cdouble> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<cdouble>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix diagonal(const ComplexVector& diag);
  // Stacks equally sized vectors as the rows of a matrix.
  static ComplexMatrix from_rows(const std::vector<ComplexVector>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  cdouble& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cdouble& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  const std::vector<cdouble>& entries() const { return data_; }
  ComplexVector row(std::size_t r) const;
  ComplexVector col(std::size_t c) const;

  bool all_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cdouble> data_;
};

ComplexMatrix mat_mul(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix hermitian(const ComplexMatrix& a);

// Solves a * X = b by Gaussian elimination with partial pivoting. Throws
// SingularMatrix when a pivot falls below 1e-12 times the largest entry
// magnitude of a.
ComplexMatrix solve_linear(const ComplexMatrix& a, const ComplexMatrix& b);

// Row vector times matrix: (1 x a.rows) * a -> 1 x a.cols.
ComplexVector row_times(const ComplexVector& row, const ComplexMatrix& a);
cdouble dot_rows(const ComplexVector& row, const ComplexVector& col);  // sum row[i] * col[i]
double norm(const ComplexVector& v);
double frobenius_norm(const ComplexMatrix& a);
ComplexMatrix subtract(const ComplexMatrix& a, const ComplexMatrix& b);

// i.i.d. CN(0, 1): real and imaginary parts each N(0, 1/2).
ComplexVector sample_standard_complex_gaussian(SeededRng& rng, std::size_t n);

}  // namespace irsnoma
