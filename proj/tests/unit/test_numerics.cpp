#include <doctest.h>

#include <cmath>

#include "irsnoma/error.hpp"
#include "irsnoma/numerics.hpp"
#include "irsnoma/rng.hpp"

using namespace irsnoma;

namespace {

ComplexMatrix random_matrix(SeededRng& rng, std::size_t r, std::size_t c) {
  return ComplexMatrix(r, c, sample_standard_complex_gaussian(rng, r * c));
}

// Plain triple loop, kept separate from the library product.
ComplexMatrix oracle_mul(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      cdouble acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("splitmix64 and fnv1a64 match reference values") {
  CHECK(splitmix64(1234567) == 6457827717110365317ULL);
  CHECK(splitmix64(1234567 + 0x9E3779B97F4A7C15ULL) == 3203168211198807973ULL);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("xoshiro stream is frozen for a fixed seed") {
  SeededRng rng(42);
  CHECK(rng.next_u64() == 6667968346354703667ULL);
  CHECK(rng.next_u64() == 16249806489848801414ULL);
  CHECK(rng.next_u64() == 11489548399102462488ULL);

  SeededRng u(42);
  CHECK(u.uniform() == doctest::Approx(0.36147128835911724).epsilon(1e-15));
  CHECK(u.uniform() == doctest::Approx(0.880903774938156).epsilon(1e-15));

  CHECK(SeededRng(42).derive("channels/slot1").next_u64() == 13536863355284581544ULL);
}

TEST_CASE("derived streams ignore parent consumption and differ by label") {
  SeededRng a(7);
  SeededRng b(7);
  for (int i = 0; i < 10; ++i) b.next_u64();
  CHECK(a.derive("x").next_u64() == b.derive("x").next_u64());
  CHECK(a.derive("x").next_u64() != a.derive("y").next_u64());
}

TEST_CASE("uniform_index stays in range") {
  SeededRng rng(3);
  for (int i = 0; i < 1000; ++i) CHECK(rng.uniform_index(7) < 7);
}

TEST_CASE("mat_mul with identity and the imaginary unit") {
  SeededRng rng(1);
  const ComplexMatrix b = random_matrix(rng, 3, 4);
  const ComplexMatrix ib = mat_mul(ComplexMatrix::identity(3), b);
  CHECK(frobenius_norm(subtract(ib, b)) == 0.0);

  const ComplexMatrix i1{{cdouble(0, 1)}};
  const ComplexMatrix sq = mat_mul(i1, i1);
  CHECK(sq(0, 0).real() == doctest::Approx(-1.0));
  CHECK(sq(0, 0).imag() == doctest::Approx(0.0));
}

TEST_CASE("mat_mul agrees with a triple-loop product") {
  SeededRng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix a = random_matrix(rng, 5, 7);
    const ComplexMatrix b = random_matrix(rng, 7, 3);
    CHECK(frobenius_norm(subtract(mat_mul(a, b), oracle_mul(a, b))) < 1e-12);
  }
}

TEST_CASE("mat_mul rejects mismatched inner dimensions") {
  CHECK_THROWS_AS(mat_mul(ComplexMatrix(2, 3), ComplexMatrix(2, 3)), DimensionMismatch);
}

TEST_CASE("hermitian is an involution and reverses products") {
  SeededRng rng(5);
  const ComplexMatrix a = random_matrix(rng, 4, 3);
  const ComplexMatrix b = random_matrix(rng, 3, 5);
  CHECK(frobenius_norm(subtract(hermitian(hermitian(a)), a)) == 0.0);
  const ComplexMatrix lhs = hermitian(mat_mul(a, b));
  const ComplexMatrix rhs = mat_mul(hermitian(b), hermitian(a));
  CHECK(frobenius_norm(subtract(lhs, rhs)) < 1e-12);

  const ComplexMatrix h = hermitian(ComplexMatrix{{cdouble(1, 2), cdouble(3, -1)}});
  CHECK(h.rows() == 2);
  CHECK(h(0, 0) == cdouble(1, -2));
  CHECK(h(1, 0) == cdouble(3, 1));
}

TEST_CASE("solve_linear inverts a diagonal system") {
  const ComplexMatrix a = ComplexMatrix::diagonal({2.0, 4.0});
  const ComplexMatrix x = solve_linear(a, ComplexMatrix::identity(2));
  CHECK(std::abs(x(0, 0) - 0.5) < 1e-15);
  CHECK(std::abs(x(1, 1) - 0.25) < 1e-15);
  CHECK(std::abs(x(0, 1)) == 0.0);
}

TEST_CASE("solve_linear residual is small on random systems") {
  SeededRng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix a = random_matrix(rng, 6, 6);
    const ComplexMatrix b = random_matrix(rng, 6, 2);
    const ComplexMatrix x = solve_linear(a, b);
    CHECK(frobenius_norm(subtract(mat_mul(a, x), b)) < 1e-10 * frobenius_norm(b));
  }
}

TEST_CASE("solve_linear detects a singular matrix") {
  const ComplexMatrix a{{1.0, 1.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(solve_linear(a, ComplexMatrix::identity(2)), SingularMatrix);
}

TEST_CASE("row_times and dot_rows do not conjugate") {
  const ComplexVector r{cdouble(0, 1), 2.0};
  const ComplexMatrix a{{1.0, cdouble(0, 1)}, {3.0, 1.0}};
  const ComplexVector out = row_times(r, a);
  CHECK(out[0] == cdouble(6, 1));
  CHECK(out[1] == cdouble(1, 0));
  CHECK(dot_rows({cdouble(0, 1)}, {cdouble(0, 1)}) == cdouble(-1, 0));
  CHECK(norm({3.0, cdouble(0, 4)}) == doctest::Approx(5.0));
}

TEST_CASE("standard complex Gaussian has unit power and split variance") {
  SeededRng rng(2024);
  const std::size_t n = 200000;
  const ComplexVector z = sample_standard_complex_gaussian(rng, n);
  double re = 0, im = 0, re2 = 0, im2 = 0, cross = 0;
  for (const auto& v : z) {
    re += v.real();
    im += v.imag();
    re2 += v.real() * v.real();
    im2 += v.imag() * v.imag();
    cross += v.real() * v.imag();
  }
  const double dn = static_cast<double>(n);
  CHECK(std::abs(re / dn) < 0.01);
  CHECK(std::abs(im / dn) < 0.01);
  CHECK(re2 / dn == doctest::Approx(0.5).epsilon(0.02));
  CHECK(im2 / dn == doctest::Approx(0.5).epsilon(0.02));
  CHECK(std::abs(cross / dn) < 0.01);
}

TEST_CASE("all_finite flags NaN entries") {
  ComplexMatrix m = ComplexMatrix::identity(2);
  CHECK(m.all_finite());
  m(1, 0) = cdouble(std::nan(""), 0.0);
  CHECK_FALSE(m.all_finite());
}
