#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "irsnoma/error.hpp"
#include "irsnoma/noma.hpp"

using namespace irsnoma;
using namespace irsnoma::noma;

namespace {

constexpr double kPi = std::numbers::pi;

// One cluster on one antenna with a unit beam.
LinkState scalar_cluster(std::vector<cdouble> gains, std::vector<double> alpha, double noise) {
  LinkState link;
  std::vector<std::size_t> members;
  for (std::size_t u = 0; u < gains.size(); ++u) {
    link.user_rows.push_back({gains[u]});
    members.push_back(u);
  }
  link.clusters.members = {members};
  link.precoder.w = ComplexMatrix{{1.0}};
  link.alloc.alpha = std::move(alpha);
  link.alloc.total_power_w = 1.0;
  link.noise_w = noise;
  return link;
}

LinkState random_link(SeededRng& rng, std::size_t n, const std::vector<std::vector<std::size_t>>& members,
                      double noise) {
  LinkState link;
  std::size_t users = 0;
  for (const auto& m : members) users += m.size();
  for (std::size_t u = 0; u < users; ++u) link.user_rows.push_back(sample_standard_complex_gaussian(rng, n));
  link.clusters.members = members;
  link.precoder.w = ComplexMatrix(n, members.size(), sample_standard_complex_gaussian(rng, n * members.size()));
  link.alloc.alpha.resize(users);
  for (auto& a : link.alloc.alpha) a = rng.uniform(0.05, 1.0);
  link.alloc.normalize(link.clusters);
  link.noise_w = noise;
  return link;
}

DecodingOrder identity_order(const Clusters& c) { return DecodingOrder{c.members}; }

}  // namespace

TEST_CASE("reflection matrix by hand") {
  const ComplexMatrix id = reflection_matrix(PhaseShiftVector::zeros(3));
  CHECK(frobenius_norm(subtract(id, ComplexMatrix::identity(3))) == 0.0);
  const ComplexMatrix r = reflection_matrix(PhaseShiftVector{{kPi, kPi / 2}, std::nullopt});
  CHECK(std::abs(r(0, 0) - cdouble(-1, 0)) < 1e-15);
  CHECK(std::abs(r(1, 1) - cdouble(0, 1)) < 1e-15);
  CHECK(r(0, 1) == cdouble(0.0));
}

TEST_CASE("phase quantisation picks the nearest grid point") {
  const auto on_grid = quantize_phases(PhaseShiftVector{{0.0, kPi / 2, kPi}, std::nullopt}, 2);
  CHECK(on_grid.thetas == std::vector<double>{0.0, kPi / 2, kPi});
  CHECK(on_grid.resolution_bits == 2u);
  CHECK(quantize_phases(PhaseShiftVector{{0.4 * kPi}, std::nullopt}, 1).thetas[0] == 0.0);
  CHECK(quantize_phases(PhaseShiftVector{{0.6 * kPi}, std::nullopt}, 2).thetas[0] == doctest::Approx(kPi / 2));
  CHECK(quantize_phases(PhaseShiftVector{{1.9 * kPi}, std::nullopt}, 1).thetas[0] == 0.0);
  CHECK(quantize_phases(PhaseShiftVector{{0.5 * kPi}, std::nullopt}, 1).thetas[0] == 0.0);
  CHECK_NOTHROW(quantize_phases(PhaseShiftVector{{1.234}, std::nullopt}, 3).validate());
  CHECK_THROWS_AS(quantize_phases(PhaseShiftVector{{0.0}, std::nullopt}, 0), InvalidArgument);
}

TEST_CASE("ZF precoder by hand") {
  const auto id = zf_precoder({{1.0, 0.0}, {0.0, 1.0}}, 100.0);
  CHECK(frobenius_norm(subtract(id.w, ComplexMatrix::identity(2))) < 1e-15);
  CHECK(id.power_scale == 1.0);

  const auto d = zf_precoder({{2.0, 0.0}, {0.0, 4.0}}, 100.0);
  CHECK(std::abs(d.w(0, 0) - 0.5) < 1e-15);
  CHECK(std::abs(d.w(1, 1) - 0.25) < 1e-15);
  CHECK(std::abs(d.w(0, 1)) < 1e-15);

  CHECK_THROWS_AS(zf_precoder({{1.0, 2.0}, {1.0, 2.0}}, 1.0), SingularMatrix);
  CHECK_THROWS_AS(zf_precoder({{1.0}, {2.0}}, 1.0), InvalidArgument);
}

TEST_CASE("ZF beams null the other design rows and respect the power budget") {
  SeededRng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ComplexVector> rows;
    for (int m = 0; m < 3; ++m) rows.push_back(sample_standard_complex_gaussian(rng, 5));
    const double p = std::pow(10.0, rng.uniform(-3.0, 2.0));
    const auto zf = zf_precoder(rows, p);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        const cdouble v = dot_rows(rows[i], zf.w.col(j));
        CHECK(std::abs(v - cdouble(i == j ? 1.0 : 0.0)) < 1e-10);
      }
    }
    CHECK(zf.total_power() <= p * (1.0 + 1e-12));
    CHECK(zf.power_scale <= 1.0);
  }
}

TEST_CASE("single user SINR without interference") {
  const LinkState link = scalar_cluster({1.0}, {1.0}, 0.5);
  CHECK(sinr_own(link, identity_order(link.clusters), 0) == doctest::Approx(2.0));
}

TEST_CASE("two-user SINRs by hand") {
  const LinkState link = scalar_cluster({1.0, 1.0}, {0.8, 0.2}, 0.1);
  const DecodingOrder order = identity_order(link.clusters);
  CHECK(sinr_own(link, order, 0) == doctest::Approx(0.64 / 0.14).epsilon(1e-12));
  CHECK(sinr_own(link, order, 0) == doctest::Approx(4.5714).epsilon(1e-4));
  CHECK(sinr_own(link, order, 1) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(sinr_cross(link, order, 1, 0) == doctest::Approx(sinr_own(link, order, 0)));
  CHECK_THROWS_AS(sinr_cross(link, order, 0, 1), InvalidArgument);

  const auto report = compute_rate_report(link, order, {});
  CHECK(report.sic_feasible);
  CHECK(sum_rate(report) == doctest::Approx(std::log2(1.0 + 0.64 / 0.14) + std::log2(1.4)).epsilon(1e-12));
}

TEST_CASE("rate function") {
  CHECK(rate(0.0) == 0.0);
  CHECK(rate(1.0) == 1.0);
  CHECK(rate(4.5714) == doctest::Approx(2.4781).epsilon(1e-4));
  CHECK_THROWS_AS(rate(-1.0), InvalidArgument);
}

TEST_CASE("cross SINR grows with the decoder's gain when noise dominates") {
  const LinkState link = scalar_cluster({1.0, 2.0}, {0.8, 0.2}, 100.0);
  const DecodingOrder order = identity_order(link.clusters);
  CHECK(sinr_cross(link, order, 1, 0) / sinr_own(link, order, 0) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("SINRs match a scalar recomputation") {
  SeededRng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const LinkState link = random_link(rng, 4, {{0, 1, 2}, {3, 4}}, 0.05);
    const DecodingOrder order = identity_order(link.clusters);
    auto gain = [&](std::size_t u, std::size_t m) {
      cdouble s = 0.0;
      for (std::size_t n = 0; n < 4; ++n) s += link.user_rows[u][n] * link.precoder.w(n, m);
      return std::norm(s);
    };
    const auto& a = link.alloc.alpha;
    auto inter = [&](std::size_t u, std::size_t own) {
      double acc = 0.0;
      for (std::size_t m = 0; m < 2; ++m) {
        if (m == own) continue;
        for (std::size_t v : link.clusters.members[m]) acc += gain(u, m) * a[v] * a[v];
      }
      return acc;
    };
    // Cluster 0, order 0,1,2: user 2 decoding user 0's signal.
    const double expect_cross = gain(2, 0) * a[0] * a[0] /
                                (gain(2, 0) * (a[1] * a[1] + a[2] * a[2]) + inter(2, 0) + link.noise_w);
    CHECK(std::abs(sinr_cross(link, order, 2, 0) - expect_cross) < 1e-12 * std::max(1.0, expect_cross));
    const double expect_own = gain(4, 1) * a[4] * a[4] / (inter(4, 1) + link.noise_w);
    CHECK(std::abs(sinr_own(link, order, 4) - expect_own) < 1e-12 * std::max(1.0, expect_own));
    CHECK(std::abs(inter_cluster_interference(link, 4) - inter(4, 1)) < 1e-12);
  }
}

TEST_CASE("exact ZF leaves no inter-cluster interference") {
  SeededRng rng(3);
  const ComplexVector r0 = sample_standard_complex_gaussian(rng, 4);
  const ComplexVector r1 = sample_standard_complex_gaussian(rng, 4);
  LinkState link;
  link.user_rows = {r0, r0, r1};
  link.clusters.members = {{0, 1}, {2}};
  link.precoder = zf_precoder({r0, r1}, 1.0);
  link.alloc = PowerAllocation::uniform(link.clusters, 3, 0.1, 1.0);
  for (std::size_t u = 0; u < 3; ++u) CHECK(inter_cluster_interference(link, u) <= 1e-18);
}

TEST_CASE("SIC feasibility") {
  const LinkState single = scalar_cluster({1.0}, {1.0}, 1.0);
  const auto r1 = compute_rate_report(single, identity_order(single.clusters), {0.5});
  CHECK(r1.sic_feasible);
  CHECK(sic_feasible(r1, identity_order(single.clusters), {0.5}).feasible);

  const LinkState twin = scalar_cluster({1.0, 1.0}, {0.7, 0.3}, 0.2);
  const auto r2 = compute_rate_report(twin, identity_order(twin.clusters), {});
  REQUIRE(r2.cross.size() == 1);
  CHECK(r2.cross[0].rate == doctest::Approx(r2.users[0].rate_own).epsilon(1e-14));
  CHECK(r2.sic_feasible);

  const auto short_rate = compute_rate_report(single, identity_order(single.clusters), {5.0});
  CHECK_FALSE(short_rate.sic_feasible);
  REQUIRE(short_rate.violations.size() == 1);
  CHECK(short_rate.violations[0].kind == Violation::Kind::MinRate);
  CHECK(sum_rate(short_rate) == 0.0);
}

TEST_CASE("decoding the strong user first breaks SIC and is charged to the decoder") {
  const LinkState link = scalar_cluster({0.5, 2.0}, {0.8, 0.2}, 0.1);
  const DecodingOrder inverted{{{1, 0}}};
  const auto r = compute_rate_report(link, inverted, {});
  CHECK_FALSE(r.sic_feasible);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].kind == Violation::Kind::Sic);
  CHECK(r.violations[0].user == 0);
  CHECK(r.violations[0].other == 1);
  CHECK_FALSE(r.users[0].sic_ok);
  CHECK(r.users[1].sic_ok);
  CHECK(sum_rate(r) == doctest::Approx(r.users[1].rate_own));
}

TEST_CASE("gain-ascending order is SIC feasible without inter-cluster leakage") {
  SeededRng rng(17);
  std::size_t checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    LinkState link = random_link(rng, 4, {{0, 1}, {2, 3, 4}}, std::pow(10.0, rng.uniform(-3.0, 0.0)));
    // No inter-cluster term, so the pairwise chain applies exactly.
    link.precoder = zf_precoder({link.user_rows[0], link.user_rows[2]}, 1.0);
    auto scaled = [&](std::size_t from) {
      const double c = rng.uniform(0.2, 3.0);
      ComplexVector r = link.user_rows[from];
      for (auto& z : r) z *= c;
      return r;
    };
    link.user_rows[1] = scaled(0);
    link.user_rows[3] = scaled(2);
    link.user_rows[4] = scaled(2);
    const DecodingOrder order = gain_ascending_order(link);
    const auto r = compute_rate_report(link, order, {});
    const auto f = sic_feasible(r, order, {});
    CHECK(f.feasible);
    ++checked;
  }
  CHECK(checked == 300);
}

TEST_CASE("exhaustive decoding order") {
  const LinkState one = scalar_cluster({1.0}, {1.0}, 1.0);
  CHECK(optimal_decoding_order(one, {}).order.sequence == std::vector<std::vector<std::size_t>>{{0}});

  SeededRng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const double g0 = rng.uniform(0.1, 3.0), g1 = rng.uniform(0.1, 3.0);
    const double a0 = rng.uniform(0.1, 0.9);
    const LinkState link = scalar_cluster({g0, g1}, {a0, 1.0 - a0}, 0.1);
    const auto best = optimal_decoding_order(link, {});
    const auto ascending = gain_ascending_order(link);
    CHECK(best.order.sequence == ascending.sequence);
  }

  for (int trial = 0; trial < 50; ++trial) {
    LinkState link = random_link(rng, 3, {{0, 1, 2}}, 0.05);
    const std::vector<double> floor(3, 0.1);
    const auto best = optimal_decoding_order(link, floor);
    std::vector<std::size_t> perm{0, 1, 2};
    do {
      CHECK(best.sum_rate >= evaluate_cluster(link, 0, perm, floor).sum_rate - 1e-12);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(best.sum_rate == doctest::Approx(evaluate_cluster(link, 0, best.order.sequence[0], floor).sum_rate));
  }
}

TEST_CASE("exhaustive order rejects clusters above three users") {
  LinkState link = scalar_cluster({1.0, 1.0, 1.0, 1.0}, {0.25, 0.25, 0.25, 0.25}, 1.0);
  CHECK_THROWS_AS(optimal_decoding_order(link, {}), InvalidArgument);
}

TEST_CASE("pairwise SIC proposition on random instances") {
  SeededRng rng(1);
  const auto ok = verify_proposition1(1000, rng);
  CHECK(ok.instances == 1000);
  CHECK(ok.violations == 0);
  CHECK(ok.worst_gap <= 1e-9);

  SeededRng inv(1);
  CHECK(verify_proposition1(1000, inv, true).violations > 0);

  const LinkState twin = scalar_cluster({cdouble(0.3, 0.4), cdouble(0.3, 0.4)}, {0.6, 0.4}, 0.01);
  const DecodingOrder order = identity_order(twin.clusters);
  CHECK(std::abs(rate(sinr_cross(twin, order, 1, 0)) - rate(sinr_own(twin, order, 0))) < 1e-12);
}

TEST_CASE("sum rate adds independent clusters") {
  LinkState link;
  link.user_rows = {{1.0, 0.0}, {0.0, 1.0}};
  link.clusters.members = {{0}, {1}};
  link.precoder = zf_precoder(link.user_rows, 2.0);
  link.alloc = PowerAllocation::uniform(link.clusters, 2, 0.3, 2.0);
  link.noise_w = 1.0;
  const auto r = compute_rate_report(link, identity_order(link.clusters), {});
  CHECK(r.users[0].tau_own == doctest::Approx(1.0));
  CHECK(sum_rate(r) == doctest::Approx(2.0));
}

TEST_CASE("sum rate does not fall as the power budget grows") {
  SeededRng rng(29);
  std::vector<ComplexVector> rows;
  for (int u = 0; u < 4; ++u) rows.push_back(sample_standard_complex_gaussian(rng, 4));
  double last = -1.0;
  for (double p : {0.01, 0.1, 1.0, 10.0}) {
    LinkState link;
    link.user_rows = rows;
    link.clusters.members = {{0, 1}, {2, 3}};
    link.precoder = zf_precoder({rows[0], rows[2]}, p);
    link.alloc = PowerAllocation::uniform(link.clusters, 4, 0.1, p);
    link.alloc.alpha = {0.7, 0.3, 0.6, 0.4};
    link.noise_w = 0.1;
    const double s = optimal_decoding_order(link, {}).sum_rate;
    CHECK(s >= last - 1e-12);
    last = s;
  }
}

TEST_CASE("power allocation normalises per cluster") {
  Clusters c{{{0, 2}, {1}}};
  const auto p = PowerAllocation::uniform(c, 3, 0.1, 1.0);
  CHECK(p.alpha[0] == doctest::Approx(0.5));
  CHECK(p.alpha[1] == doctest::Approx(1.0));
  CHECK_NOTHROW(p.validate(c));
  CHECK_THROWS_AS((Clusters{{{0, 0}}}.cluster_of(1)), InvalidArgument);
  CHECK_THROWS_AS((Clusters{{{0}}}.cluster_of(2)), InvalidArgument);
}

TEST_CASE("random decoding order permutes each cluster") {
  Clusters c{{{0, 1, 2}, {3, 4}}};
  SeededRng rng(2);
  for (int i = 0; i < 20; ++i) CHECK_NOTHROW(random_order(c, rng).validate(c));
}

TEST_CASE("TDMA baseline") {
  const ComplexVector row{0.3, 0.4};
  const double p = 2.0, noise = 0.01;
  LinkState single;
  single.user_rows = {row};
  single.clusters.members = {{0}};
  single.precoder = zf_precoder({row}, p);
  single.alloc = PowerAllocation::uniform(single.clusters, 1, 1.0, p);
  single.noise_w = noise;
  const double noma_rate = sum_rate(compute_rate_report(single, identity_order(single.clusters), {}));
  CHECK(oma_baseline({row}, p, noise) == doctest::Approx(noma_rate).epsilon(1e-12));

  const double snr = p * 0.25 / noise;
  CHECK(oma_baseline({row, row}, p, noise) == doctest::Approx(std::log2(1.0 + snr)).epsilon(1e-12));

  SeededRng rng(31);
  std::vector<ComplexVector> rows;
  double expect = 0.0;
  for (int u = 0; u < 5; ++u) {
    rows.push_back(sample_standard_complex_gaussian(rng, 3));
    double g = 0.0;
    for (const auto& z : rows.back()) g += std::norm(z);
    expect += 0.2 * std::log2(1.0 + p * g / noise);
  }
  CHECK(oma_baseline(rows, p, noise) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(oma_baseline(std::vector<ComplexVector>{}, p, noise) == 0.0);
}
