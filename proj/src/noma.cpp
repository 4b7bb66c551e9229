#include "irsnoma/noma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "irsnoma/error.hpp"

namespace irsnoma {

double wrap_phase(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta, two_pi);
  if (t < 0.0) t += two_pi;
  if (t >= two_pi) t = 0.0;
  return t;
}

void PhaseShiftVector::validate() const {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (double t : thetas) {
    if (!(t >= 0.0 && t < two_pi)) throw InvalidArgument("phase outside [0, 2pi)");
    if (resolution_bits) {
      const double step = two_pi / static_cast<double>(1u << *resolution_bits);
      const double n = t / step;
      if (std::abs(n - std::round(n)) > 1e-9) throw InvalidArgument("phase off the resolution grid");
    }
  }
}

ComplexVector PhaseShiftVector::reflection_row() const {
  ComplexVector out(thetas.size());
  for (std::size_t k = 0; k < thetas.size(); ++k) out[k] = std::polar(1.0, thetas[k]);
  return out;
}

namespace noma {

namespace {

// |r_u . beam_g|^2 for every user u and beam g.
struct GainTable {
  std::vector<std::vector<double>> gain;
  std::vector<double> beam_load;     // sum of alpha^2 of the users on each beam
  std::vector<std::size_t> cluster_of;

  explicit GainTable(const LinkState& link) {
    const std::size_t n_users = link.user_rows.size();
    cluster_of = link.clusters.cluster_of(n_users);
    const std::size_t m = link.clusters.count();
    if (link.precoder.w.cols() != m) throw DimensionMismatch("precoder has a different number of beams than clusters");
    if (link.alloc.alpha.size() != n_users) throw DimensionMismatch("power allocation size differs from user count");
    std::vector<ComplexVector> beams;
    beams.reserve(m);
    for (std::size_t g = 0; g < m; ++g) beams.push_back(link.precoder.beam(g));
    gain.assign(n_users, std::vector<double>(m, 0.0));
    for (std::size_t u = 0; u < n_users; ++u) {
      for (std::size_t g = 0; g < m; ++g) gain[u][g] = std::norm(dot_rows(link.user_rows[u], beams[g]));
    }
    beam_load.assign(m, 0.0);
    for (std::size_t g = 0; g < m; ++g) {
      for (std::size_t u : link.clusters.members[g]) beam_load[g] += link.alloc.alpha[u] * link.alloc.alpha[u];
    }
  }

  double inter(std::size_t u) const {
    double acc = 0.0;
    for (std::size_t g = 0; g < beam_load.size(); ++g) {
      if (g != cluster_of[u]) acc += gain[u][g] * beam_load[g];
    }
    return acc;
  }
};

// SINR at `decoder` for the signal at position p of `sequence`.
double sequence_sinr(const GainTable& t, const LinkState& link, std::size_t cluster,
                     const std::vector<std::size_t>& sequence, std::size_t p, std::size_t decoder) {
  const double g = t.gain[decoder][cluster];
  const double a = link.alloc.alpha[sequence[p]];
  double later = 0.0;
  for (std::size_t q = p + 1; q < sequence.size(); ++q) later += link.alloc.alpha[sequence[q]] * link.alloc.alpha[sequence[q]];
  return g * a * a / (g * later + t.inter(decoder) + link.noise_w);
}

bool below(double achieved, double required) {
  return achieved < required - 1e-12 * std::max(1.0, std::abs(required));
}

struct ClusterDetail {
  std::vector<UserRate> users;
  std::vector<CrossRate> cross;
  std::vector<Violation> violations;
};

ClusterDetail cluster_detail(const GainTable& t, const LinkState& link, std::size_t cluster,
                             const std::vector<std::size_t>& sequence, const std::vector<double>& min_rates) {
  ClusterDetail d;
  for (std::size_t p = 0; p < sequence.size(); ++p) {
    const std::size_t u = sequence[p];
    UserRate ur;
    ur.user = u;
    ur.cluster = cluster;
    ur.tau_own = sequence_sinr(t, link, cluster, sequence, p, u);
    ur.rate_own = rate(ur.tau_own);
    d.users.push_back(ur);
    for (std::size_t q = p + 1; q < sequence.size(); ++q) {
      CrossRate cr;
      cr.decoder = sequence[q];
      cr.signal = u;
      cr.tau = sequence_sinr(t, link, cluster, sequence, p, sequence[q]);
      cr.rate = rate(cr.tau);
      d.cross.push_back(cr);
    }
  }
  for (const auto& ur : d.users) {
    const double required = min_rates.empty() ? 0.0 : min_rates.at(ur.user);
    if (below(ur.rate_own, required)) {
      d.violations.push_back({Violation::Kind::MinRate, ur.user, ur.user, ur.rate_own, required});
    }
  }
  for (const auto& cr : d.cross) {
    const auto own = std::find_if(d.users.begin(), d.users.end(), [&](const UserRate& u) { return u.user == cr.signal; });
    if (below(cr.rate, own->rate_own)) {
      d.violations.push_back({Violation::Kind::Sic, cr.decoder, cr.signal, cr.rate, own->rate_own});
    }
  }
  for (auto& ur : d.users) {
    ur.sic_ok = std::none_of(d.violations.begin(), d.violations.end(), [&](const Violation& v) { return v.user == ur.user; });
    ur.counted_rate = ur.sic_ok ? ur.rate_own : 0.0;
  }
  return d;
}

ClusterScore score(const ClusterDetail& d) {
  ClusterScore s;
  for (const auto& u : d.users) s.sum_rate += u.counted_rate;
  s.feasible = d.violations.empty();
  return s;
}

}  // namespace

std::size_t Clusters::n_users() const {
  std::size_t n = 0;
  for (const auto& m : members) n += m.size();
  return n;
}

std::vector<std::size_t> Clusters::cluster_of(std::size_t n_users) const {
  constexpr std::size_t unset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> out(n_users, unset);
  for (std::size_t m = 0; m < members.size(); ++m) {
    for (std::size_t u : members[m]) {
      if (u >= n_users) throw InvalidArgument("cluster member id out of range");
      if (out[u] != unset) throw InvalidArgument("user " + std::to_string(u) + " assigned twice");
      out[u] = m;
    }
  }
  for (std::size_t u = 0; u < n_users; ++u) {
    if (out[u] == unset) throw InvalidArgument("user " + std::to_string(u) + " not assigned");
  }
  return out;
}

PowerAllocation PowerAllocation::uniform(const Clusters& clusters, std::size_t n_users, double alpha0,
                                         double total_power_w) {
  PowerAllocation p;
  p.alpha.assign(n_users, alpha0);
  p.total_power_w = total_power_w;
  p.normalize(clusters);
  return p;
}

void PowerAllocation::normalize(const Clusters& clusters) {
  for (const auto& m : clusters.members) {
    double s = 0.0;
    for (std::size_t u : m) s += alpha.at(u);
    if (!(s > 0.0)) throw InvalidArgument("power allocation: cluster with zero total coefficient");
    for (std::size_t u : m) alpha[u] /= s;
  }
}

void PowerAllocation::validate(const Clusters& clusters) const {
  if (!(total_power_w > 0.0)) throw InvalidArgument("power allocation: P must be positive");
  for (const auto& m : clusters.members) {
    double s = 0.0;
    for (std::size_t u : m) {
      const double a = alpha.at(u);
      if (!(a > 0.0 && a <= 1.0)) throw InvalidArgument("power allocation: alpha outside (0, 1]");
      s += a;
    }
    if (std::abs(s - 1.0) > 1e-12) throw InvalidArgument("power allocation: cluster coefficients do not sum to 1");
  }
}

std::size_t DecodingOrder::rank(std::size_t m, std::size_t user) const {
  const auto& seq = sequence.at(m);
  const auto it = std::find(seq.begin(), seq.end(), user);
  if (it == seq.end()) throw InvalidArgument("user " + std::to_string(user) + " not in cluster " + std::to_string(m));
  return static_cast<std::size_t>(it - seq.begin());
}

void DecodingOrder::validate(const Clusters& clusters) const {
  if (sequence.size() != clusters.count()) throw InvalidArgument("decoding order: cluster count mismatch");
  for (std::size_t m = 0; m < sequence.size(); ++m) {
    auto a = sequence[m];
    auto b = clusters.members[m];
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw InvalidArgument("decoding order: not a permutation of cluster " + std::to_string(m));
  }
}

ComplexVector PrecodingMatrix::beam(std::size_t m) const {
  ComplexVector b = w.col(m);
  for (auto& z : b) z *= power_scale;
  return b;
}

double PrecodingMatrix::total_power() const { return power_scale * power_scale * std::pow(frobenius_norm(w), 2); }

ComplexMatrix reflection_matrix(const PhaseShiftVector& theta) {
  theta.validate();
  return ComplexMatrix::diagonal(theta.reflection_row());
}

PhaseShiftVector quantize_phases(const PhaseShiftVector& theta, unsigned bits) {
  if (bits == 0 || bits > 16) throw InvalidArgument("quantize_phases: bits must be in [1, 16]");
  const std::size_t levels = std::size_t{1} << bits;
  const double step = 2.0 * std::numbers::pi / static_cast<double>(levels);
  PhaseShiftVector out;
  out.resolution_bits = bits;
  out.thetas.reserve(theta.size());
  for (double raw : theta.thetas) {
    const double t = wrap_phase(raw);
    const std::size_t lo = static_cast<std::size_t>(std::floor(t / step)) % levels;
    const std::size_t hi = (lo + 1) % levels;
    const double d_lo = t - static_cast<double>(lo) * step;
    const double d_hi = static_cast<double>(lo + 1) * step - t;
    std::size_t pick;
    if (std::abs(d_lo - d_hi) <= 1e-12) {
      pick = std::min(lo, hi);
    } else {
      pick = d_lo < d_hi ? lo : hi;
    }
    out.thetas.push_back(static_cast<double>(pick) * step);
  }
  return out;
}

PrecodingMatrix zf_precoder(const std::vector<ComplexVector>& design_rows, double p_total_w) {
  if (design_rows.empty()) throw InvalidArgument("zf_precoder: no design channels");
  if (!(p_total_w > 0.0)) throw InvalidArgument("zf_precoder: P must be positive");
  const ComplexMatrix hh = ComplexMatrix::from_rows(design_rows);  // H^H, M x N
  if (hh.rows() > hh.cols()) throw InvalidArgument("zf_precoder: more clusters than antennas");
  const ComplexMatrix h = hermitian(hh);
  const ComplexMatrix gram = mat_mul(hh, h);
  const ComplexMatrix inv = solve_linear(gram, ComplexMatrix::identity(gram.rows()));
  PrecodingMatrix out;
  out.w = mat_mul(h, inv);
  const double raw_power = std::pow(frobenius_norm(out.w), 2);
  out.power_scale = std::min(1.0, std::sqrt(p_total_w / raw_power));
  if (!out.w.all_finite() || !std::isfinite(out.power_scale)) throw SingularMatrix("zf_precoder: non-finite precoder");
  return out;
}

double inter_cluster_interference(const LinkState& link, std::size_t user) {
  const GainTable t(link);
  return t.inter(user);
}

double sinr_own(const LinkState& link, const DecodingOrder& order, std::size_t user) {
  const GainTable t(link);
  const std::size_t m = t.cluster_of.at(user);
  const auto& seq = order.sequence.at(m);
  return sequence_sinr(t, link, m, seq, order.rank(m, user), user);
}

double sinr_cross(const LinkState& link, const DecodingOrder& order, std::size_t decoder, std::size_t signal_user) {
  const GainTable t(link);
  const std::size_t m = t.cluster_of.at(signal_user);
  if (t.cluster_of.at(decoder) != m) throw InvalidArgument("sinr_cross: users are in different clusters");
  const std::size_t p = order.rank(m, signal_user);
  if (order.rank(m, decoder) <= p) throw InvalidArgument("sinr_cross: decoder must come after the signal's user");
  return sequence_sinr(t, link, m, order.sequence[m], p, decoder);
}

double rate(double tau) {
  if (!(tau >= 0.0)) throw InvalidArgument("rate: negative SINR");
  return std::log2(1.0 + tau);
}

Feasibility sic_feasible(const RateReport& report, const DecodingOrder& order, const std::vector<double>& min_rates) {
  Feasibility f;
  for (const auto& ur : report.users) {
    const double required = min_rates.empty() ? 0.0 : min_rates.at(ur.user);
    if (below(ur.rate_own, required)) f.violations.push_back({Violation::Kind::MinRate, ur.user, ur.user, ur.rate_own, required});
  }
  for (const auto& cr : report.cross) {
    const std::size_t m = report.users.at(cr.signal).cluster;
    if (order.rank(m, cr.signal) >= order.rank(m, cr.decoder)) continue;
    const double own = report.users.at(cr.signal).rate_own;
    if (below(cr.rate, own)) f.violations.push_back({Violation::Kind::Sic, cr.decoder, cr.signal, cr.rate, own});
  }
  f.feasible = f.violations.empty();
  return f;
}

RateReport compute_rate_report(const LinkState& link, const DecodingOrder& order, const std::vector<double>& min_rates) {
  order.validate(link.clusters);
  const GainTable t(link);
  RateReport r;
  r.users.resize(link.user_rows.size());
  r.min_rates = min_rates;
  r.noise_w = link.noise_w;
  for (std::size_t m = 0; m < link.clusters.count(); ++m) {
    ClusterDetail d = cluster_detail(t, link, m, order.sequence[m], min_rates);
    for (const auto& ur : d.users) r.users[ur.user] = ur;
    r.cross.insert(r.cross.end(), d.cross.begin(), d.cross.end());
  }
  const Feasibility f = sic_feasible(r, order, min_rates);
  r.sic_feasible = f.feasible;
  r.violations = f.violations;
  for (auto& ur : r.users) {
    ur.sic_ok = std::none_of(f.violations.begin(), f.violations.end(), [&](const Violation& v) { return v.user == ur.user; });
    ur.counted_rate = ur.sic_ok ? ur.rate_own : 0.0;
  }
  return r;
}

double sum_rate(const RateReport& report) {
  double s = 0.0;
  for (const auto& u : report.users) s += u.sic_ok ? u.rate_own : 0.0;
  return s;
}

DecodingOrder gain_ascending_order(const LinkState& link) {
  const GainTable t(link);
  DecodingOrder order;
  for (std::size_t m = 0; m < link.clusters.count(); ++m) {
    auto seq = link.clusters.members[m];
    std::stable_sort(seq.begin(), seq.end(), [&](std::size_t a, std::size_t b) { return t.gain[a][m] < t.gain[b][m]; });
    order.sequence.push_back(std::move(seq));
  }
  return order;
}

DecodingOrder random_order(const Clusters& clusters, SeededRng& rng) {
  DecodingOrder order;
  for (const auto& m : clusters.members) {
    auto seq = m;
    for (std::size_t i = seq.size(); i > 1; --i) std::swap(seq[i - 1], seq[rng.uniform_index(i)]);
    order.sequence.push_back(std::move(seq));
  }
  return order;
}

OrderSearchResult optimal_decoding_order(const Clusters& clusters, const ClusterEvaluator& evaluate,
                                         const DecodingOrder& fallback) {
  OrderSearchResult out;
  for (std::size_t m = 0; m < clusters.count(); ++m) {
    const auto& members = clusters.members[m];
    if (members.empty()) throw InvalidArgument("optimal_decoding_order: empty cluster");
    if (members.size() > 3) throw InvalidArgument("optimal_decoding_order: cluster larger than 3");
    std::vector<std::size_t> best = fallback.sequence.at(m);
    ClusterScore best_score = evaluate(m, best);
    auto perm = members;
    std::sort(perm.begin(), perm.end());
    do {
      const ClusterScore s = evaluate(m, perm);
      const bool better = s.sum_rate > best_score.sum_rate ||
                          (s.sum_rate == best_score.sum_rate && s.feasible && !best_score.feasible);
      if (better) {
        best = perm;
        best_score = s;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.order.sequence.push_back(best);
    out.cluster_feasible.push_back(best_score.feasible);
    out.all_feasible = out.all_feasible && best_score.feasible;
    out.sum_rate += best_score.sum_rate;
  }
  return out;
}

OrderSearchResult optimal_decoding_order(const LinkState& link, const std::vector<double>& min_rates) {
  const GainTable t(link);
  const DecodingOrder fallback = gain_ascending_order(link);
  return optimal_decoding_order(
      link.clusters,
      [&](std::size_t m, const std::vector<std::size_t>& seq) { return score(cluster_detail(t, link, m, seq, min_rates)); },
      fallback);
}

ClusterScore evaluate_cluster(const LinkState& link, std::size_t cluster, const std::vector<std::size_t>& sequence,
                              const std::vector<double>& min_rates) {
  const GainTable t(link);
  return score(cluster_detail(t, link, cluster, sequence, min_rates));
}

Proposition1Stats verify_proposition1(std::size_t instances, SeededRng& rng, bool invert_order, double slack) {
  constexpr std::size_t n = 4;
  Proposition1Stats stats;
  stats.worst_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < instances; ++i) {
    LinkState link;
    link.user_rows = {sample_standard_complex_gaussian(rng, n), sample_standard_complex_gaussian(rng, n)};
    link.clusters.members = {{0, 1}};
    link.precoder.w = ComplexMatrix(n, 1, sample_standard_complex_gaussian(rng, n));
    link.precoder.power_scale = 1.0;
    const double a0 = rng.uniform(0.05, 0.95);
    link.alloc.alpha = {a0, 1.0 - a0};
    link.alloc.total_power_w = 1.0;
    link.noise_w = std::pow(10.0, rng.uniform(-3.0, 1.0));

    const GainTable t(link);
    const bool zero_weaker = t.gain[0][0] <= t.gain[1][0];
    const std::size_t weak = zero_weaker ? 0 : 1;
    const std::size_t strong = 1 - weak;
    DecodingOrder order;
    order.sequence = {invert_order ? std::vector<std::size_t>{strong, weak} : std::vector<std::size_t>{weak, strong}};
    const std::size_t first = order.sequence[0][0];
    const std::size_t second = order.sequence[0][1];

    const double own = rate(sinr_own(link, order, first));
    const double cross = rate(sinr_cross(link, order, second, first));
    const double gap = own - cross;
    stats.worst_gap = std::max(stats.worst_gap, gap);
    ++stats.instances;
    if (gap > slack) ++stats.violations;
  }
  return stats;
}

double oma_baseline(const std::vector<ComplexVector>& user_rows, double p_total_w, double noise_w) {
  if (user_rows.empty()) return 0.0;
  const double share = 1.0 / static_cast<double>(user_rows.size());
  double total = 0.0;
  for (const auto& r : user_rows) {
    const double g = std::pow(norm(r), 2);
    total += share * std::log2(1.0 + p_total_w * g / noise_w);
  }
  return total;
}

double oma_baseline(const channel::ChannelRealization& ch, const PhaseShiftVector& theta, double p_total_w,
                    double noise_w) {
  std::vector<ComplexVector> rows;
  rows.reserve(ch.n_users());
  for (std::size_t l = 0; l < ch.n_users(); ++l) {
    ComplexVector r = channel::effective_channel(ch.h_users[l], theta, ch.g);
    if (!ch.direct.empty()) {
      for (std::size_t n = 0; n < r.size(); ++n) r[n] += std::conj(ch.direct[l][n]);
    }
    rows.push_back(std::move(r));
  }
  return oma_baseline(rows, p_total_w, noise_w);
}

}  // namespace noma
}  // namespace irsnoma
