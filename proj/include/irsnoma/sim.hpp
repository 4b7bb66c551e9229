#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "irsnoma/channel.hpp"
#include "irsnoma/clustering.hpp"
#include "irsnoma/config.hpp"
#include "irsnoma/lstm.hpp"
#include "irsnoma/noma.hpp"
#include "irsnoma/rl.hpp"

namespace irsnoma::sim {

struct MobilityResult {
  // Ground truth from the sampled start: history_slots observed slots, then
  // t0, then the s slots to be predicted.
  std::vector<mobility::Trajectory> truth;
  // The s predicted positions per user (slots t1..ts).
  std::vector<mobility::Trajectory> predicted;
  mobility::PredictionStats stats;
  std::vector<double> training_losses;
};

// Depends only on the seed and the mobility fields of cfg.
MobilityResult run_mobility(const ScenarioConfig& cfg, std::uint64_t seed);

// Memoises run_mobility across sweep points that share a seed and mobility settings.
class MobilityCache {
 public:
  const MobilityResult& get(const ScenarioConfig& cfg, std::uint64_t seed);
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, MobilityResult> entries_;
};

// Everything a scheme needs to score a state in one slot.
struct SlotContext {
  std::vector<channel::Position> positions;
  channel::ChannelRealization channels;
  clustering::ClusterAssignment assignment;
  noma::Clusters clusters;
  std::vector<ComplexMatrix> phi_users;       // diag(h_u^H) G per user
  std::vector<ComplexMatrix> phi_design;      // diag(c_m^H) G per cluster centroid c_m
  std::vector<ComplexVector> direct_rows;     // h_d^H per user when the direct link is used
  std::vector<ComplexVector> direct_design;   // centroid direct rows (no_irs)
  std::optional<noma::DecodingOrder> fixed_order;
  bool silent = false;                        // no usable link at all
};

struct SlotScore {
  double sum_rate = 0.0;
  bool sic_feasible = true;
  bool singular = false;
  std::optional<noma::RateReport> report;
};

// Penalised sum-rate of a state in a slot. A rank-deficient ZF design scores 0.
SlotScore score_state(const ScenarioConfig& cfg, const SlotContext& ctx, const rl::StateVector& s,
                      bool with_report = false);

// Builds channels, clusters and design channels for every predicted slot.
std::vector<SlotContext> build_slots(const ScenarioConfig& cfg, std::uint64_t seed, const MobilityResult& mob);

class SlotEnvironment : public rl::Environment {
 public:
  SlotEnvironment(const ScenarioConfig& cfg, const std::vector<SlotContext>& slots, unsigned phase_bits);

  std::size_t num_slots() const override { return slots_.size(); }
  const rl::ActionSpace& actions() const override { return space_; }
  rl::StateVector initial_state() const override;
  rl::StateVector enter_slot(std::size_t slot, const rl::StateVector& s) const override;
  rl::StateVector apply(std::size_t slot, const rl::StateVector& s, std::size_t action) const override;
  double objective(std::size_t slot, const rl::StateVector& s) const override;

 private:
  const ScenarioConfig& cfg_;
  const std::vector<SlotContext>& slots_;
  rl::ActionSpace space_;
};

unsigned phase_bits_for(const ScenarioConfig& cfg, Scheme scheme);

struct MetricsRecord {
  std::string scheme;
  std::string sweep_var;
  double sweep_value = 0.0;
  std::uint64_t seed = 0;
  std::size_t slot = 0;                 // index of the last slot in the period
  double sum_rate = 0.0;                // summed over the period
  std::vector<double> slot_sum_rates;
  double sic_feasible_fraction = 0.0;   // share of slots whose final report is SIC feasible
  double episode_final_reward = 0.0;    // 0 for schemes without training
};

struct PipelineDetail {
  MobilityResult mobility;
  std::vector<SlotContext> slots;
  std::vector<rl::StateVector> final_states;
  std::vector<noma::RateReport> reports;
  std::vector<double> episode_rewards;
  std::vector<rl::StepRecord> trace;
};

// One seed of the full flow: positions, prediction, channels, clustering,
// scheme optimiser, final rate reports.
MetricsRecord run_pipeline(const ScenarioConfig& cfg, std::uint64_t seed, MobilityCache* cache = nullptr,
                           PipelineDetail* detail = nullptr);

enum class SweepVariable { Power, Elements, Clusters, Antennas };

SweepVariable parse_sweep_variable(const std::string& name);
std::string sweep_variable_name(SweepVariable v);
ScenarioConfig with_sweep_value(ScenarioConfig cfg, SweepVariable v, double value);

using Progress = std::function<void(const MetricsRecord&)>;

// schemes x values x seeds, sorted by (scheme, value, seed).
std::vector<MetricsRecord> sweep(const ScenarioConfig& base, SweepVariable variable, const std::vector<double>& values,
                                 const std::vector<Scheme>& schemes, MobilityCache* cache = nullptr,
                                 const Progress& progress = {});

// Paired runs of cfg.scheme with exhaustive and with uniformly random
// decoding orders; schemes "optimal" and "random", 2 x seeds rows.
std::vector<MetricsRecord> decoding_order_study(const ScenarioConfig& cfg, MobilityCache* cache = nullptr,
                                                const Progress& progress = {});

std::string format_csv(const std::vector<MetricsRecord>& records);
// Throws InvalidArgument on empty records and Error on I/O failure.
void emit_csv(const std::vector<MetricsRecord>& records, const std::string& path);

}  // namespace irsnoma::sim
