#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "irsnoma/channel.hpp"
#include "irsnoma/numerics.hpp"
#include "irsnoma/phase.hpp"
#include "irsnoma/rng.hpp"

namespace irsnoma::noma {

// Users served by each ZF beam. members[m] lists user ids of cluster m.
struct Clusters {
  std::vector<std::vector<std::size_t>> members;

  std::size_t count() const { return members.size(); }
  std::size_t n_users() const;
  // cluster_of[user]; throws InvalidArgument unless every user appears once.
  std::vector<std::size_t> cluster_of(std::size_t n_users) const;
};

// Per-user amplitude coefficients. Within each cluster they sum to one.
struct PowerAllocation {
  std::vector<double> alpha;   // indexed by user id
  double total_power_w = 0.1;  // P

  // Every user starts at alpha0 and each cluster is rescaled to sum to one.
  static PowerAllocation uniform(const Clusters& clusters, std::size_t n_users, double alpha0,
                                 double total_power_w);
  void normalize(const Clusters& clusters);
  void validate(const Clusters& clusters) const;
};

// Per-cluster SIC sequence: sequence[m][0] is decoded first.
struct DecodingOrder {
  std::vector<std::vector<std::size_t>> sequence;

  // Position of `user` in cluster m's sequence.
  std::size_t rank(std::size_t m, std::size_t user) const;
  void validate(const Clusters& clusters) const;
};

struct PrecodingMatrix {
  ComplexMatrix w;            // N x M, unscaled ZF columns
  double power_scale = 1.0;   // applied uniformly to every column

  ComplexVector beam(std::size_t m) const;  // power_scale * w[:, m]
  double total_power() const;               // sum_m ||beam(m)||^2
};

// Everything needed to evaluate SINRs for one channel state.
struct LinkState {
  std::vector<ComplexVector> user_rows;  // effective 1 x N channel of every user
  Clusters clusters;
  PrecodingMatrix precoder;
  PowerAllocation alloc;
  double noise_w = 1e-7;  // delta^2
};

ComplexMatrix reflection_matrix(const PhaseShiftVector& theta);

// Nearest grid point 2*pi*n/2^bits under circular distance; ties go to the
// smaller n.
PhaseShiftVector quantize_phases(const PhaseShiftVector& theta, unsigned bits);

// W = H (H^H H)^{-1} for the stacked design rows H^H (M x N), then a uniform
// scale min(1, sqrt(P / sum ||w_m||^2)). Throws SingularMatrix for a
// rank-deficient design and InvalidArgument when M > N.
PrecodingMatrix zf_precoder(const std::vector<ComplexVector>& design_rows, double p_total_w);

// SINR of `user` decoding its own signal, including the residual
// inter-cluster term (zero when the ZF nulls are exact).
double sinr_own(const LinkState& link, const DecodingOrder& order, std::size_t user);

// SINR at `decoder` for the signal of `signal_user` (same cluster, decoded
// earlier). Throws InvalidArgument for any other pairing.
double sinr_cross(const LinkState& link, const DecodingOrder& order, std::size_t decoder,
                  std::size_t signal_user);

// Residual inter-cluster interference power seen by `user`.
double inter_cluster_interference(const LinkState& link, std::size_t user);

double rate(double tau);

struct UserRate {
  std::size_t user = 0;
  std::size_t cluster = 0;
  double tau_own = 0.0;
  double rate_own = 0.0;
  bool sic_ok = true;
  double counted_rate = 0.0;  // rate_own, or 0 when the user violates a constraint
};

struct CrossRate {
  std::size_t decoder = 0;
  std::size_t signal = 0;
  double tau = 0.0;
  double rate = 0.0;
};

struct Violation {
  enum class Kind { MinRate, Sic };
  Kind kind = Kind::MinRate;
  std::size_t user = 0;   // the user whose rate is forfeited
  std::size_t other = 0;  // for Sic: the earlier-decoded user whose signal failed
  double achieved = 0.0;
  double required = 0.0;
};

struct RateReport {
  std::vector<UserRate> users;  // indexed by user id
  std::vector<CrossRate> cross;
  std::vector<double> min_rates;
  double noise_w = 0.0;
  bool sic_feasible = true;
  std::vector<Violation> violations;
};

struct Feasibility {
  bool feasible = true;
  std::vector<Violation> violations;
};

// Checks the cross-rate SIC condition for every ordered intra-cluster pair
// and the per-user minimum rate. A failed SIC condition is charged to the
// decoder, whose own message becomes unrecoverable.
Feasibility sic_feasible(const RateReport& report, const DecodingOrder& order,
                         const std::vector<double>& min_rates);

RateReport compute_rate_report(const LinkState& link, const DecodingOrder& order,
                               const std::vector<double>& min_rates);

// Sum of own rates; users flagged by sic_feasible contribute zero.
double sum_rate(const RateReport& report);

// Ascending |r_u . beam_m| within each cluster.
DecodingOrder gain_ascending_order(const LinkState& link);
DecodingOrder random_order(const Clusters& clusters, SeededRng& rng);

struct ClusterScore {
  double sum_rate = 0.0;  // penalised
  bool feasible = true;
};

struct OrderSearchResult {
  DecodingOrder order;
  std::vector<bool> cluster_feasible;
  bool all_feasible = true;
  double sum_rate = 0.0;  // penalised total of the chosen orders
};

using ClusterEvaluator = std::function<ClusterScore(std::size_t cluster, const std::vector<std::size_t>& sequence)>;

// Exhaustive search over every permutation of each cluster (at most 3! each).
// Picks the highest penalised cluster sum-rate; ties prefer a feasible order,
// then the fallback order. Throws InvalidArgument on an empty or >3 cluster.
OrderSearchResult optimal_decoding_order(const Clusters& clusters, const ClusterEvaluator& evaluate,
                                         const DecodingOrder& fallback);

OrderSearchResult optimal_decoding_order(const LinkState& link, const std::vector<double>& min_rates);

// Penalised sum-rate of one cluster under a given sequence.
ClusterScore evaluate_cluster(const LinkState& link, std::size_t cluster,
                              const std::vector<std::size_t>& sequence,
                              const std::vector<double>& min_rates);

struct Proposition1Stats {
  std::size_t instances = 0;
  std::size_t violations = 0;
  double worst_gap = 0.0;  // max of R_own - R_cross over all checks
};

// Random two-user single-cluster instances with no inter-cluster term. The
// weaker user is decoded first (or the stronger one when `invert_order`).
Proposition1Stats verify_proposition1(std::size_t instances, SeededRng& rng, bool invert_order = false,
                                      double slack = 1e-9);

// TDMA: each user gets 1/L of the time, full power and a matched beam.
double oma_baseline(const std::vector<ComplexVector>& user_rows, double p_total_w, double noise_w);
double oma_baseline(const channel::ChannelRealization& ch, const PhaseShiftVector& theta, double p_total_w,
                    double noise_w);

}  // namespace irsnoma::noma
