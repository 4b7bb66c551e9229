#include "irsnoma/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "irsnoma/error.hpp"

namespace irsnoma::sim {

namespace {

const std::map<std::string, Scheme>& scheme_table() {
  static const std::map<std::string, Scheme> table{
      {"dqn_continuous", Scheme::DqnContinuous}, {"dqn_1bit", Scheme::Dqn1Bit},
      {"dqn_2bit", Scheme::Dqn2Bit},             {"qlearning", Scheme::QLearning},
      {"random_phase", Scheme::RandomPhase},     {"no_irs", Scheme::NoIrs},
      {"oma_tdma", Scheme::OmaTdma}};
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError("expected a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_uint(const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("expected a non-negative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError("expected a boolean, got '" + v + "'");
}

using Setter = std::function<void(ScenarioConfig&, const std::string&)>;

Setter size_field(std::size_t ScenarioConfig::*f) {
  return [f](ScenarioConfig& c, const std::string& v) { c.*f = static_cast<std::size_t>(to_uint(v)); };
}

Setter double_field(double ScenarioConfig::*f) {
  return [f](ScenarioConfig& c, const std::string& v) { c.*f = to_double(v); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"n_users", size_field(&ScenarioConfig::n_users)},
      {"n_antennas", size_field(&ScenarioConfig::n_antennas)},
      {"n_elements", size_field(&ScenarioConfig::n_elements)},
      {"n_clusters",
       [](ScenarioConfig& c, const std::string& v) {
         c.n_clusters = v == "auto" ? std::nullopt : std::optional<std::size_t>(to_uint(v));
       }},
      {"power_dbm", double_field(&ScenarioConfig::power_dbm)},
      {"slots", size_field(&ScenarioConfig::slots)},
      {"seeds", size_field(&ScenarioConfig::seeds)},
      {"seed_base", [](ScenarioConfig& c, const std::string& v) { c.seed_base = to_uint(v); }},
      {"scheme", [](ScenarioConfig& c, const std::string& v) { c.scheme = parse_scheme(v); }},
      {"bs_x", [](ScenarioConfig& c, const std::string& v) { c.bs_position.x = to_double(v); }},
      {"bs_y", [](ScenarioConfig& c, const std::string& v) { c.bs_position.y = to_double(v); }},
      {"c_ref", [](ScenarioConfig& c, const std::string& v) { c.path_loss.c_ref = to_double(v); }},
      {"alpha_bu", [](ScenarioConfig& c, const std::string& v) { c.path_loss.alpha_bu = to_double(v); }},
      {"alpha_iu", [](ScenarioConfig& c, const std::string& v) { c.path_loss.alpha_iu = to_double(v); }},
      {"alpha_bi", [](ScenarioConfig& c, const std::string& v) { c.path_loss.alpha_bi = to_double(v); }},
      {"k_factor_bi", [](ScenarioConfig& c, const std::string& v) { c.rician.k_factor_bi = to_double(v); }},
      {"k_factor_iu", [](ScenarioConfig& c, const std::string& v) { c.rician.k_factor_iu = to_double(v); }},
      {"direct_link", [](ScenarioConfig& c, const std::string& v) { c.direct_link.enabled = to_bool(v); }},
      {"direct_with_irs", [](ScenarioConfig& c, const std::string& v) { c.direct_with_irs = to_bool(v); }},
      {"blockage_loss_db",
       [](ScenarioConfig& c, const std::string& v) { c.direct_link.blockage_loss_db = to_double(v); }},
      {"noise_dbw", double_field(&ScenarioConfig::noise_dbw)},
      {"region_x_min", [](ScenarioConfig& c, const std::string& v) { c.region.x_min = to_double(v); }},
      {"region_x_max", [](ScenarioConfig& c, const std::string& v) { c.region.x_max = to_double(v); }},
      {"region_y_min", [](ScenarioConfig& c, const std::string& v) { c.region.y_min = to_double(v); }},
      {"region_y_max", [](ScenarioConfig& c, const std::string& v) { c.region.y_max = to_double(v); }},
      {"density", [](ScenarioConfig& c, const std::string& v) { c.region.density_fn_id = v; }},
      {"step_std", double_field(&ScenarioConfig::step_std)},
      {"history_slots", size_field(&ScenarioConfig::history_slots)},
      {"lstm_hidden", [](ScenarioConfig& c, const std::string& v) { c.lstm.hidden_size = to_uint(v); }},
      {"lstm_epochs", [](ScenarioConfig& c, const std::string& v) { c.lstm.epochs = to_uint(v); }},
      {"lstm_learning_rate", [](ScenarioConfig& c, const std::string& v) { c.lstm.learning_rate = to_double(v); }},
      {"lstm_grad_clip", [](ScenarioConfig& c, const std::string& v) { c.lstm.grad_clip_norm = to_double(v); }},
      {"lstm_drop_factor", [](ScenarioConfig& c, const std::string& v) { c.lstm.lr_drop_factor = to_double(v); }},
      {"lstm_drop_epoch", [](ScenarioConfig& c, const std::string& v) { c.lstm.lr_drop_epoch = to_uint(v); }},
      {"lstm_retrain_divisor",
       [](ScenarioConfig& c, const std::string& v) { c.lstm.retrain_divisor = to_uint(v); }},
      {"lstm_early_stop_patience",
       [](ScenarioConfig& c, const std::string& v) { c.lstm.early_stop_patience = to_uint(v); }},
      {"eps_tilde", double_field(&ScenarioConfig::eps_tilde)},
      {"rho1", [](ScenarioConfig& c, const std::string& v) { c.thresholds.rho1 = to_double(v); }},
      {"rho2", [](ScenarioConfig& c, const std::string& v) { c.thresholds.rho2 = to_double(v); }},
      {"feature_mode", [](ScenarioConfig& c, const std::string& v) { c.feature_mode = v; }},
      {"alpha0", double_field(&ScenarioConfig::alpha0)},
      {"min_rate", double_field(&ScenarioConfig::min_rate)},
      {"decoding_order", [](ScenarioConfig& c, const std::string& v) { c.decoding_order = v; }},
      {"tabular_learning_rate",
       [](ScenarioConfig& c, const std::string& v) { c.agent.tabular_learning_rate = to_double(v); }},
      {"network_learning_rate",
       [](ScenarioConfig& c, const std::string& v) { c.agent.network_learning_rate = to_double(v); }},
      {"discount", [](ScenarioConfig& c, const std::string& v) { c.agent.discount = to_double(v); }},
      {"epsilon_start", [](ScenarioConfig& c, const std::string& v) { c.agent.epsilon_start = to_double(v); }},
      {"epsilon_min", [](ScenarioConfig& c, const std::string& v) { c.agent.epsilon_min = to_double(v); }},
      {"epsilon_decay_fraction",
       [](ScenarioConfig& c, const std::string& v) { c.agent.epsilon_decay_fraction = to_double(v); }},
      {"episodes", [](ScenarioConfig& c, const std::string& v) { c.agent.episodes = to_uint(v); }},
      {"steps_per_slot", [](ScenarioConfig& c, const std::string& v) { c.agent.steps_per_slot = to_uint(v); }},
      {"replay_capacity", [](ScenarioConfig& c, const std::string& v) { c.agent.replay_capacity = to_uint(v); }},
      {"minibatch", [](ScenarioConfig& c, const std::string& v) { c.agent.minibatch = to_uint(v); }},
      {"sync_period", [](ScenarioConfig& c, const std::string& v) { c.agent.sync_period = to_uint(v); }},
      {"hidden", [](ScenarioConfig& c, const std::string& v) { c.agent.hidden = to_uint(v); }},
      {"optimizer",
       [](ScenarioConfig& c, const std::string& v) {
         if (v == "adam") {
           c.agent.optimizer = rl::OptimizerKind::Adam;
         } else if (v == "sgd") {
           c.agent.optimizer = rl::OptimizerKind::Sgd;
         } else {
           throw ConfigError("optimizer must be adam or sgd");
         }
       }},
      {"dqn_phase_bits",
       [](ScenarioConfig& c, const std::string& v) { c.dqn_phase_bits = static_cast<unsigned>(to_uint(v)); }},
  };
  return table;
}

}  // namespace

Scheme parse_scheme(const std::string& name) {
  const auto it = scheme_table().find(name);
  if (it == scheme_table().end()) throw ConfigError("unknown scheme '" + name + "'");
  return it->second;
}

std::string scheme_name(Scheme s) {
  for (const auto& [name, value] : scheme_table()) {
    if (value == s) return name;
  }
  throw InvalidArgument("scheme_name: unknown scheme");
}

bool uses_irs(Scheme s) { return s != Scheme::NoIrs; }

void ScenarioConfig::validate() const {
  if (n_users == 0 || n_antennas == 0 || n_elements == 0) throw ConfigError("L, N and K must be >= 1");
  if (n_clusters) {
    if (*n_clusters == 0) throw ConfigError("n_clusters must be >= 1");
    if (*n_clusters > n_antennas) throw ConfigError("n_clusters must not exceed n_antennas");
    if (n_users > 3 * *n_clusters) throw ConfigError("n_users exceeds three users per cluster");
  } else if (n_users > 3 * n_antennas) {
    throw ConfigError("n_users exceeds three users per antenna");
  }
  if (slots == 0) throw ConfigError("slots must be >= 1");
  if (seeds == 0) throw ConfigError("seeds must be >= 1");
  if (!std::isfinite(power_dbm)) throw ConfigError("power_dbm must be finite");
  if (history_slots == 0) throw ConfigError("history_slots must be >= 1");
  if (!(step_std >= 0.0)) throw ConfigError("step_std must be non-negative");
  if (!(eps_tilde > 0.0)) throw ConfigError("eps_tilde must be positive");
  if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw ConfigError("alpha0 must lie in (0, 1]");
  if (!(min_rate >= 0.0)) throw ConfigError("min_rate must be non-negative");
  if (feature_mode != "channel" && feature_mode != "position") throw ConfigError("feature_mode must be channel or position");
  if (decoding_order != "optimal" && decoding_order != "random" && decoding_order != "gain_ascending") {
    throw ConfigError("decoding_order must be optimal, random or gain_ascending");
  }
  if (dqn_phase_bits == 0 || dqn_phase_bits > 8) throw ConfigError("dqn_phase_bits must lie in [1, 8]");
  if (!(rician.k_factor_bi >= 0.0) || !(rician.k_factor_iu >= 0.0)) throw ConfigError("K-factors must be non-negative");
  try {
    path_loss.validate();
    region.validate();
    thresholds.validate();
    agent.validate();
    if (lstm.epochs > 0) lstm.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

double ScenarioConfig::power_w() const { return std::pow(10.0, (power_dbm - 30.0) / 10.0); }

double ScenarioConfig::noise_w() const { return std::pow(10.0, noise_dbw / 10.0); }

void apply_setting(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown key '" + key + "'");
  it->second(cfg, value);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, v] : setters()) keys.push_back(k);
  return keys;
}

ScenarioConfig parse_config(const std::string& text, ScenarioConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply_setting(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  base.validate();
  return base;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace irsnoma::sim
