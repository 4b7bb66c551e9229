#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "irsnoma/channel.hpp"
#include "irsnoma/clustering.hpp"
#include "irsnoma/lstm.hpp"
#include "irsnoma/mobility.hpp"
#include "irsnoma/rl.hpp"

namespace irsnoma::sim {

enum class Scheme { DqnContinuous, Dqn1Bit, Dqn2Bit, QLearning, RandomPhase, NoIrs, OmaTdma };

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme s);
bool uses_irs(Scheme s);

struct ScenarioConfig {
  std::size_t n_users = 10;                     // L
  std::size_t n_antennas = 10;                  // N
  std::size_t n_elements = 10;                  // K
  std::optional<std::size_t> n_clusters = 5;    // M; empty selects M from the thresholds
  double power_dbm = 20.0;                      // P
  std::size_t slots = 3;                        // s
  std::size_t seeds = 20;
  std::uint64_t seed_base = 1;
  Scheme scheme = Scheme::DqnContinuous;

  channel::Position bs_position{50.0, 0.0};
  channel::PathLossParams path_loss;
  // A strongly LoS BS-IRS link leaves the cascade close to rank one, too
  // little to carry M zero-forcing beams; the scenario uses k_bi = 1.
  channel::RicianParams rician{1.0, 3.0};
  // The no_irs scheme serves users over this link; IRS schemes add it only
  // when direct_with_irs is set. Disabled, no_irs has zero rate.
  channel::DirectLinkParams direct_link{true, 70.0};
  bool direct_with_irs = false;
  double noise_dbw = -170.0;              // delta^2

  mobility::Region region;
  double step_std = 1.0;                  // m per slot
  std::size_t history_slots = 12;         // observed slots before t0 used to train the LSTM
  mobility::LstmTrainConfig lstm;

  double eps_tilde = 1e-15;
  clustering::ClusterThresholds thresholds;
  std::string feature_mode = "channel";   // "channel" or "position"

  double alpha0 = 0.1;
  double min_rate = 0.1;                  // bits/s/Hz per user
  std::string decoding_order = "optimal"; // "optimal", "random" or "gain_ascending"

  rl::AgentHyperparams agent;
  unsigned dqn_phase_bits = 3;            // action grid for the continuous scheme

  void validate() const;
  double power_w() const;
  double noise_w() const;
};

// Parses "key = value" lines; '#' starts a comment. Unknown keys and
// malformed values throw ConfigError naming the line.
ScenarioConfig parse_config(const std::string& text, ScenarioConfig base = {});
ScenarioConfig load_config(const std::string& path);
void apply_setting(ScenarioConfig& cfg, const std::string& key, const std::string& value);
std::vector<std::string> config_keys();

}  // namespace irsnoma::sim
