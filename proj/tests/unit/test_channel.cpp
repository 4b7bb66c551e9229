#include <doctest.h>

#include <cmath>
#include <numbers>

#include "irsnoma/channel.hpp"
#include "irsnoma/error.hpp"

using namespace irsnoma;
using namespace irsnoma::channel;

namespace {

double mean_power(const std::vector<cdouble>& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return s / static_cast<double>(v.size());
}

ComplexMatrix ones(std::size_t r, std::size_t c) { return ComplexMatrix(r, c, std::vector<cdouble>(r * c, 1.0)); }

PhaseShiftVector random_phases(SeededRng& rng, std::size_t k) {
  PhaseShiftVector p = PhaseShiftVector::zeros(k);
  for (auto& t : p.thetas) t = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return p;
}

}  // namespace

TEST_CASE("path_loss at reference distance and by hand") {
  CHECK(path_loss(1.0, 1e-3, 3.5) == doctest::Approx(1e-3));
  CHECK(path_loss(10.0, 1e-3, 2.2) == doctest::Approx(1e-3 * std::pow(10.0, -2.2)).epsilon(1e-12));
  CHECK(path_loss(10.0, 1e-3, 2.2) == doctest::Approx(6.3096e-6).epsilon(1e-4));
  CHECK_THROWS_AS(path_loss(0.0, 1e-3, 2.2), InvalidArgument);
  CHECK_THROWS_AS(path_loss(-1.0, 1e-3, 2.2), InvalidArgument);
}

TEST_CASE("path loss parameters reject sub-free-space exponents") {
  PathLossParams p;
  CHECK_NOTHROW(p.validate());
  p.alpha_iu = 1.5;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("Rician sampling limits and power") {
  SeededRng rng(1);
  const ComplexMatrix los = ones(4, 5);
  const ComplexMatrix pure = sample_rician(rng, 4, 5, 1e12, los);
  for (const auto& z : pure.entries()) CHECK(std::abs(z - cdouble(1.0)) < 1e-5);

  SeededRng r0(2);
  CHECK(mean_power(sample_rician(r0, 1000, 100, 0.0, ones(1000, 100)).entries()) == doctest::Approx(1.0).epsilon(0.02));
  SeededRng r1(3);
  CHECK(mean_power(sample_rician(r1, 1000, 100, 1.0, ones(1000, 100)).entries()) == doctest::Approx(1.0).epsilon(0.02));

  CHECK_THROWS_AS(sample_rician(rng, 2, 2, -1.0, ones(2, 2)), InvalidArgument);
  CHECK_THROWS_AS(sample_rician(rng, 2, 2, 1.0, ones(2, 3)), DimensionMismatch);
}

TEST_CASE("ULA response is unit modulus") {
  for (const auto& z : ula_response(8, 0.7)) CHECK(std::abs(z) == doctest::Approx(1.0));
  CHECK(ula_response(3, 0.0)[2] == cdouble(1.0));
}

TEST_CASE("generate_channels is deterministic and shaped") {
  NetworkLayout layout;
  layout.user_positions = {{30.0, 30.0}, {25.0, 35.0}};
  layout.n_antennas = 4;
  layout.n_elements = 6;
  const SeededRng rng(17);
  const auto a = generate_channels(layout, {}, {}, {true, 40.0}, rng);
  const auto b = generate_channels(layout, {}, {}, {true, 40.0}, rng);
  CHECK(a.g.rows() == 6);
  CHECK(a.g.cols() == 4);
  REQUIRE(a.n_users() == 2);
  CHECK(a.h_users[0].size() == 6);
  REQUIRE(a.direct.size() == 2);
  CHECK(a.direct[0].size() == 4);
  CHECK(a.g.entries() == b.g.entries());
  CHECK(a.h_users == b.h_users);
  CHECK(a.direct == b.direct);

  const auto blocked = generate_channels(layout, {}, {}, {false, 40.0}, rng);
  CHECK(blocked.direct.empty());
  CHECK(blocked.g.entries() == a.g.entries());
}

TEST_CASE("a user's channel does not depend on the other users") {
  NetworkLayout one;
  one.user_positions = {{30.0, 30.0}};
  NetworkLayout two = one;
  two.user_positions.push_back({22.0, 38.0});
  const SeededRng rng(5);
  CHECK(generate_channels(one, {}, {}, {}, rng).h_users[0] == generate_channels(two, {}, {}, {}, rng).h_users[0]);
}

TEST_CASE("IRS-user gain falls with the path-loss exponent") {
  NetworkLayout layout;
  layout.user_positions = {{10.0, 0.0}, {100.0, 0.0}};
  layout.n_elements = 4;
  layout.n_antennas = 1;
  double near = 0.0, far = 0.0;
  SeededRng base(99);
  for (int i = 0; i < 1000; ++i) {
    const auto ch = generate_channels(layout, {}, {}, {}, base.derive("r" + std::to_string(i)));
    near += std::pow(norm(ch.h_users[0]), 2);
    far += std::pow(norm(ch.h_users[1]), 2);
  }
  CHECK(near / far == doctest::Approx(std::pow(10.0, 2.8)).epsilon(0.2));
}

TEST_CASE("single antenna single element BS-IRS power equals path loss") {
  NetworkLayout layout;
  layout.user_positions = {{30.0, 30.0}};
  layout.n_elements = 1;
  layout.n_antennas = 1;
  const PathLossParams pl;
  double acc = 0.0;
  SeededRng base(123);
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    acc += std::norm(generate_channels(layout, pl, {}, {}, base.derive("r" + std::to_string(i))).g(0, 0));
  }
  const double expected = path_loss(distance(layout.bs_position, layout.irs_position), pl.c_ref, pl.alpha_bi);
  CHECK(acc / n == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("layout validation") {
  NetworkLayout layout;
  CHECK_THROWS_AS(layout.validate(), InvalidArgument);
  layout.user_positions = {{1.0, 1.0}};
  CHECK_NOTHROW(layout.validate());
  layout.n_elements = 0;
  CHECK_THROWS_AS(layout.validate(), InvalidArgument);
}

TEST_CASE("effective channel with identity reflection is h^H G") {
  SeededRng rng(8);
  const ComplexVector h = sample_standard_complex_gaussian(rng, 3);
  const ComplexMatrix g(3, 2, sample_standard_complex_gaussian(rng, 6));
  const ComplexVector e = effective_channel(h, PhaseShiftVector::zeros(3), g);
  for (std::size_t c = 0; c < 2; ++c) {
    cdouble ref = 0.0;
    for (std::size_t k = 0; k < 3; ++k) ref += std::conj(h[k]) * g(k, c);
    CHECK(std::abs(e[c] - ref) < 1e-14);
  }
}

TEST_CASE("single element effective channel by hand") {
  PhaseShiftVector theta{{std::numbers::pi}, std::nullopt};
  const ComplexVector e = effective_channel({1.0}, theta, ComplexMatrix{{2.0}});
  REQUIRE(e.size() == 1);
  CHECK(e[0].real() == doctest::Approx(-2.0));
  CHECK(std::abs(e[0].imag()) < 1e-12);
}

TEST_CASE("factored and literal effective channels agree") {
  SeededRng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const ComplexVector h = sample_standard_complex_gaussian(rng, 6);
    const ComplexMatrix g(6, 4, sample_standard_complex_gaussian(rng, 24));
    const PhaseShiftVector theta = random_phases(rng, 6);
    const ComplexVector a = effective_channel(h, theta, g);
    const ComplexVector b = effective_channel_factored(theta, cascade_matrix(h, g));
    for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(a[c] - b[c]) < 1e-12);
  }
}

TEST_CASE("effective channel is linear in G") {
  SeededRng rng(4);
  const ComplexVector h = sample_standard_complex_gaussian(rng, 3);
  const ComplexMatrix g1(3, 2, sample_standard_complex_gaussian(rng, 6));
  const ComplexMatrix g2(3, 2, sample_standard_complex_gaussian(rng, 6));
  std::vector<cdouble> sum(6);
  for (std::size_t i = 0; i < 6; ++i) sum[i] = 2.0 * g1.entries()[i] + g2.entries()[i];
  const PhaseShiftVector theta = random_phases(rng, 3);
  const ComplexVector e1 = effective_channel(h, theta, g1);
  const ComplexVector e2 = effective_channel(h, theta, g2);
  const ComplexVector es = effective_channel(h, theta, ComplexMatrix(3, 2, sum));
  for (std::size_t c = 0; c < 2; ++c) CHECK(std::abs(es[c] - (2.0 * e1[c] + e2[c])) < 1e-12);
}

TEST_CASE("phase vectors validate range and grid") {
  PhaseShiftVector p{{0.0, 1.0}, std::nullopt};
  CHECK_NOTHROW(p.validate());
  p.thetas[1] = 2.0 * std::numbers::pi;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  PhaseShiftVector grid{{std::numbers::pi / 2}, 2u};
  CHECK_NOTHROW(grid.validate());
  grid.thetas[0] = 1.0;
  CHECK_THROWS_AS(grid.validate(), InvalidArgument);
  CHECK(wrap_phase(-std::numbers::pi / 2) == doctest::Approx(1.5 * std::numbers::pi));
  CHECK(wrap_phase(5.0 * std::numbers::pi) == doctest::Approx(std::numbers::pi));
}
