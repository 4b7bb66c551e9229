#include "irsnoma/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "irsnoma/error.hpp"

namespace irsnoma {

namespace {

std::string dims(const ComplexMatrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, cdouble{0.0, 0.0}) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cdouble> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) {
    throw DimensionMismatch("ComplexMatrix: entry count does not match rows*cols");
  }
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cdouble>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionMismatch("ComplexMatrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(const ComplexVector& diag) {
  ComplexMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

ComplexMatrix ComplexMatrix::from_rows(const std::vector<ComplexVector>& rows) {
  if (rows.empty()) return {};
  const std::size_t cols = rows.front().size();
  std::vector<cdouble> entries;
  entries.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw DimensionMismatch("from_rows: rows differ in length");
    entries.insert(entries.end(), r.begin(), r.end());
  }
  return ComplexMatrix(rows.size(), cols, std::move(entries));
}

ComplexVector ComplexMatrix::row(std::size_t r) const {
  return ComplexVector(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                       data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
}

ComplexVector ComplexMatrix::col(std::size_t c) const {
  ComplexVector out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

bool ComplexMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](const cdouble& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

ComplexMatrix mat_mul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionMismatch("mat_mul: " + dims(a) + " times " + dims(b));
  }
  ComplexMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cdouble aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

ComplexMatrix hermitian(const ComplexMatrix& a) {
  ComplexMatrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = std::conj(a(i, j));
  }
  return out;
}

ComplexMatrix solve_linear(const ComplexMatrix& a, const ComplexMatrix& b) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw DimensionMismatch("solve_linear: matrix is " + dims(a) + ", not square");
  if (b.rows() != n) throw DimensionMismatch("solve_linear: rhs is " + dims(b));

  double scale = 0.0;
  for (const auto& z : a.entries()) scale = std::max(scale, std::abs(z));
  if (scale == 0.0) throw SingularMatrix("solve_linear: zero matrix");
  const double tolerance = 1e-12 * scale;

  ComplexMatrix lu = a;
  ComplexMatrix x = b;
  const std::size_t m = b.cols();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    double best = std::abs(lu(k, k));
    for (std::size_t r = k + 1; r < n; ++r) {
      if (std::abs(lu(r, k)) > best) {
        best = std::abs(lu(r, k));
        pivot = r;
      }
    }
    if (best < tolerance) throw SingularMatrix("solve_linear: pivot below tolerance");
    if (pivot != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(lu(k, c), lu(pivot, c));
      for (std::size_t c = 0; c < m; ++c) std::swap(x(k, c), x(pivot, c));
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      const cdouble factor = lu(r, k) / lu(k, k);
      if (factor == cdouble{}) continue;
      for (std::size_t c = k; c < n; ++c) lu(r, c) -= factor * lu(k, c);
      for (std::size_t c = 0; c < m; ++c) x(r, c) -= factor * x(k, c);
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    for (std::size_t c = 0; c < m; ++c) {
      cdouble acc = x(k, c);
      for (std::size_t j = k + 1; j < n; ++j) acc -= lu(k, j) * x(j, c);
      x(k, c) = acc / lu(k, k);
    }
  }
  return x;
}

ComplexVector row_times(const ComplexVector& row, const ComplexMatrix& a) {
  if (row.size() != a.rows()) throw DimensionMismatch("row_times: row length vs " + dims(a));
  ComplexVector out(a.cols(), cdouble{});
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const cdouble rk = row[k];
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += rk * a(k, j);
  }
  return out;
}

cdouble dot_rows(const ComplexVector& row, const ComplexVector& col) {
  if (row.size() != col.size()) throw DimensionMismatch("dot_rows: length mismatch");
  cdouble acc{};
  for (std::size_t i = 0; i < row.size(); ++i) acc += row[i] * col[i];
  return acc;
}

double norm(const ComplexVector& v) {
  double acc = 0.0;
  for (const auto& z : v) acc += std::norm(z);
  return std::sqrt(acc);
}

double frobenius_norm(const ComplexMatrix& a) { return norm(a.entries()); }

ComplexMatrix subtract(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionMismatch("subtract: " + dims(a) + " minus " + dims(b));
  }
  std::vector<cdouble> out(a.entries().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.entries()[i] - b.entries()[i];
  return ComplexMatrix(a.rows(), a.cols(), std::move(out));
}

ComplexVector sample_standard_complex_gaussian(SeededRng& rng, std::size_t n) {
  ComplexVector out(n);
  const double s = std::sqrt(0.5);
  for (auto& z : out) {
    const double re = rng.normal();
    const double im = rng.normal();
    z = {s * re, s * im};
  }
  return out;
}

}  // namespace irsnoma
