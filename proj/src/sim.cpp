#include "irsnoma/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>

#include "irsnoma/error.hpp"

namespace irsnoma::sim {

namespace {

std::string slot_label(const char* prefix, std::size_t t) { return std::string(prefix) + std::to_string(t); }

std::size_t min_clusters(std::size_t users) { return (users + 2) / 3; }

clustering::ClusterAssignment cluster_users(const ScenarioConfig& cfg, const clustering::CsiSet& csi,
                                            const SeededRng& stream, clustering::Responsibilities& resp) {
  const std::size_t l = csi.size();
  auto fit_with = [&](std::size_t m) {
    SeededRng rng = stream.derive("m" + std::to_string(m));
    clustering::KgmmFit fit = clustering::fit_kgmm(csi, m, cfg.eps_tilde, rng);
    resp = fit.resp;
    return clustering::assign_users(fit.resp, fit.params);
  };
  if (cfg.n_clusters) return fit_with(std::min(*cfg.n_clusters, l));

  // Smallest M whose clusters all meet the thresholds, else the best fraction.
  const std::size_t hi = std::min(cfg.n_antennas, l);
  if (min_clusters(l) > hi) throw CapacityInfeasible("no cluster count fits " + std::to_string(l) + " users");
  clustering::ClusterAssignment best;
  clustering::Responsibilities best_resp;
  double best_fraction = -1.0;
  for (std::size_t m = min_clusters(l); m <= hi; ++m) {
    clustering::ClusterAssignment a = fit_with(m);
    const double f = clustering::threshold_report(csi, a, cfg.thresholds).fraction;
    if (f > best_fraction) {
      best_fraction = f;
      best = std::move(a);
      best_resp = resp;
    }
    if (f >= 1.0) break;
  }
  resp = std::move(best_resp);
  return best;
}

// Responsibility-weighted centroid of the normalised channels for each cluster.
std::vector<ComplexVector> design_channels(const clustering::CsiSet& csi, const clustering::ClusterAssignment& a,
                                           const clustering::Responsibilities& resp) {
  std::vector<ComplexVector> out;
  for (std::size_t c = 0; c < a.count(); ++c) {
    const std::size_t comp = a.component[c];
    ComplexVector centroid(csi.normalized.front().size(), cdouble{0.0, 0.0});
    double total = 0.0;
    for (std::size_t u = 0; u < csi.size(); ++u) {
      const double w = resp.r[u][comp];
      total += w;
      for (std::size_t k = 0; k < centroid.size(); ++k) centroid[k] += w * csi.normalized[u][k];
    }
    for (auto& z : centroid) z /= total;
    out.push_back(std::move(centroid));
  }
  return out;
}

ComplexVector conj_vec(const ComplexVector& v) {
  ComplexVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::conj(v[i]);
  return out;
}

void normalize_alphas(rl::StateVector& s, const noma::Clusters& clusters) {
  for (const auto& members : clusters.members) {
    double sum = 0.0;
    for (std::size_t u : members) sum += s.alphas.at(u);
    for (std::size_t u : members) s.alphas[u] /= sum;
  }
}

rl::StateVector fixed_state(const ScenarioConfig& cfg, const SlotContext& ctx) {
  rl::StateVector s{std::vector<double>(cfg.n_elements, 0.0), std::vector<double>(cfg.n_users, cfg.alpha0)};
  normalize_alphas(s, ctx.clusters);
  return s;
}

}  // namespace

MobilityResult run_mobility(const ScenarioConfig& cfg, std::uint64_t seed) {
  const SeededRng root(seed);
  MobilityResult out;
  mobility::AcceptRejectSampler sampler{cfg.region, cfg.region.density_sup(), root.derive("mobility/start")};
  const auto starts = mobility::sample_initial_positions(sampler, cfg.n_users);
  SeededRng walk = root.derive("mobility/walk");
  out.truth = mobility::simulate_true_motion(starts, cfg.region, cfg.history_slots + cfg.slots, cfg.step_std, walk);

  std::vector<mobility::Trajectory> history = out.truth;
  for (auto& t : history) t.positions.resize(cfg.history_slots + 1);
  SeededRng init = root.derive("lstm_init");
  mobility::LstmNetwork net = mobility::LstmNetwork::random(cfg.lstm.hidden_size, init);
  if (cfg.lstm.epochs > 0) {
    auto trained = mobility::lstm_train(net, history, cfg.region, cfg.lstm);
    net = std::move(trained.net);
    out.training_losses = std::move(trained.losses);
  }
  out.predicted = mobility::predict_positions(net, history, cfg.slots, cfg.region, cfg.lstm, &out.stats);
  return out;
}

const MobilityResult& MobilityCache::get(const ScenarioConfig& cfg, std::uint64_t seed) {
  std::ostringstream key;
  key.precision(17);
  const auto& r = cfg.region;
  const auto& l = cfg.lstm;
  key << seed << '|' << cfg.n_users << '|' << cfg.slots << '|' << cfg.history_slots << '|' << cfg.step_std << '|'
      << r.x_min << ',' << r.x_max << ',' << r.y_min << ',' << r.y_max << ',' << r.density_fn_id << '|' << l.epochs
      << ',' << l.learning_rate << ',' << l.grad_clip_norm << ',' << l.lr_drop_factor << ',' << l.lr_drop_epoch << ','
      << l.hidden_size << ',' << l.retrain_divisor << ',' << l.early_stop_patience;
  auto it = entries_.find(key.str());
  if (it == entries_.end()) it = entries_.emplace(key.str(), run_mobility(cfg, seed)).first;
  return it->second;
}

std::vector<SlotContext> build_slots(const ScenarioConfig& cfg, std::uint64_t seed, const MobilityResult& mob) {
  const SeededRng root(seed);
  const bool irs = uses_irs(cfg.scheme);
  channel::DirectLinkParams direct = cfg.direct_link;
  direct.enabled = cfg.direct_link.enabled && (!irs || cfg.direct_with_irs);

  std::vector<SlotContext> out;
  for (std::size_t t = 0; t < cfg.slots; ++t) {
    SlotContext ctx;
    for (const auto& traj : mob.predicted) ctx.positions.push_back(traj.positions.at(t));
    channel::NetworkLayout layout{cfg.bs_position, {0.0, 0.0}, ctx.positions, cfg.n_antennas, cfg.n_elements};
    ctx.channels = channel::generate_channels(layout, cfg.path_loss, cfg.rician, direct,
                                              root.derive(slot_label("channels/slot", t + 1)));
    if (!irs && !direct.enabled) {
      ctx.silent = true;
      for (std::size_t u = 0; u < cfg.n_users; ++u) ctx.clusters.members.push_back({u});
      out.push_back(std::move(ctx));
      continue;
    }

    const auto& raw = irs ? ctx.channels.h_users : ctx.channels.direct;
    const clustering::CsiSet csi = cfg.feature_mode == "position" ? clustering::position_features(raw, ctx.positions)
                                                                  : clustering::normalize_channels(raw);
    clustering::Responsibilities resp;
    ctx.assignment = cluster_users(cfg, csi, root.derive(slot_label("clustering/slot", t + 1)), resp);
    ctx.clusters.members = ctx.assignment.members;
    const auto design = design_channels(csi, ctx.assignment, resp);

    if (irs) {
      for (const auto& h : ctx.channels.h_users) ctx.phi_users.push_back(channel::cascade_matrix(h, ctx.channels.g));
      for (const auto& c : design) ctx.phi_design.push_back(channel::cascade_matrix(c, ctx.channels.g));
    } else {
      for (const auto& c : design) ctx.direct_design.push_back(conj_vec(c));
    }
    for (const auto& d : ctx.channels.direct) ctx.direct_rows.push_back(conj_vec(d));

    if (cfg.decoding_order == "random") {
      SeededRng order_rng = root.derive(slot_label("decoding_order/slot", t + 1));
      ctx.fixed_order = noma::random_order(ctx.clusters, order_rng);
    }
    out.push_back(std::move(ctx));
  }
  return out;
}

SlotScore score_state(const ScenarioConfig& cfg, const SlotContext& ctx, const rl::StateVector& s, bool with_report) {
  SlotScore score;
  if (ctx.silent) return score;
  const std::size_t l = cfg.n_users;
  std::vector<ComplexVector> rows;
  std::vector<ComplexVector> design;
  if (uses_irs(cfg.scheme)) {
    ComplexVector upsilon(s.thetas.size());
    for (std::size_t k = 0; k < upsilon.size(); ++k) upsilon[k] = std::polar(1.0, s.thetas[k]);
    for (std::size_t u = 0; u < l; ++u) {
      ComplexVector r = row_times(upsilon, ctx.phi_users[u]);
      if (!ctx.direct_rows.empty()) {
        for (std::size_t n = 0; n < r.size(); ++n) r[n] += ctx.direct_rows[u][n];
      }
      rows.push_back(std::move(r));
    }
    for (const auto& phi : ctx.phi_design) design.push_back(row_times(upsilon, phi));
  } else {
    rows = ctx.direct_rows;
    design = ctx.direct_design;
  }

  if (cfg.scheme == Scheme::OmaTdma) {
    score.sum_rate = noma::oma_baseline(rows, cfg.power_w(), cfg.noise_w());
    return score;
  }

  noma::LinkState link;
  link.user_rows = std::move(rows);
  link.clusters = ctx.clusters;
  link.alloc.alpha = s.alphas;
  link.alloc.total_power_w = cfg.power_w();
  link.noise_w = cfg.noise_w();
  try {
    link.precoder = noma::zf_precoder(design, cfg.power_w());
  } catch (const SingularMatrix&) {
    score.singular = true;
    score.sic_feasible = false;
    return score;
  }
  const std::vector<double> min_rates(l, cfg.min_rate);

  noma::DecodingOrder order;
  if (ctx.fixed_order) {
    order = *ctx.fixed_order;
  } else if (cfg.decoding_order == "gain_ascending") {
    order = noma::gain_ascending_order(link);
  } else {
    const auto best = noma::optimal_decoding_order(link, min_rates);
    if (!with_report) {
      score.sum_rate = best.sum_rate;
      score.sic_feasible = best.all_feasible;
      return score;
    }
    order = best.order;
  }
  noma::RateReport report = noma::compute_rate_report(link, order, min_rates);
  score.sum_rate = noma::sum_rate(report);
  score.sic_feasible = report.sic_feasible;
  if (with_report) score.report = std::move(report);
  return score;
}

unsigned phase_bits_for(const ScenarioConfig& cfg, Scheme scheme) {
  switch (scheme) {
    case Scheme::Dqn1Bit:
      return 1;
    case Scheme::Dqn2Bit:
      return 2;
    default:
      return cfg.dqn_phase_bits;
  }
}

SlotEnvironment::SlotEnvironment(const ScenarioConfig& cfg, const std::vector<SlotContext>& slots, unsigned phase_bits)
    : cfg_(cfg), slots_(slots) {
  space_.k_elements = cfg.n_elements;
  space_.n_users = cfg.n_users;
  space_.phase_bits = phase_bits;
}

rl::StateVector SlotEnvironment::initial_state() const {
  return {std::vector<double>(cfg_.n_elements, 0.0), std::vector<double>(cfg_.n_users, cfg_.alpha0)};
}

rl::StateVector SlotEnvironment::enter_slot(std::size_t slot, const rl::StateVector& s) const {
  rl::StateVector out = s;
  normalize_alphas(out, slots_.at(slot).clusters);
  return out;
}

rl::StateVector SlotEnvironment::apply(std::size_t slot, const rl::StateVector& s, std::size_t action) const {
  return rl::apply_action(s, space_, action, slots_.at(slot).clusters.members);
}

double SlotEnvironment::objective(std::size_t slot, const rl::StateVector& s) const {
  return score_state(cfg_, slots_.at(slot), s).sum_rate;
}

MetricsRecord run_pipeline(const ScenarioConfig& cfg, std::uint64_t seed, MobilityCache* cache,
                           PipelineDetail* detail) {
  cfg.validate();
  MobilityResult local;
  const MobilityResult* mob = nullptr;
  if (cache) {
    mob = &cache->get(cfg, seed);
  } else {
    local = run_mobility(cfg, seed);
    mob = &local;
  }
  const std::vector<SlotContext> slots = build_slots(cfg, seed, *mob);
  const SeededRng root(seed);

  MetricsRecord rec;
  rec.scheme = scheme_name(cfg.scheme);
  rec.seed = seed;
  rec.slot = cfg.slots;

  std::vector<rl::StateVector> states;
  std::vector<double> episode_rewards;
  std::vector<rl::StepRecord> trace;
  switch (cfg.scheme) {
    case Scheme::DqnContinuous:
    case Scheme::Dqn1Bit:
    case Scheme::Dqn2Bit:
    case Scheme::QLearning:
    case Scheme::OmaTdma: {
      const unsigned bits = phase_bits_for(cfg, cfg.scheme);
      const SlotEnvironment env(cfg, slots, bits);
      SeededRng agent_rng = root.derive("agent");
      std::unique_ptr<rl::Agent> agent;
      if (cfg.scheme == Scheme::QLearning) {
        agent = std::make_unique<rl::QLearningAgent>(env.actions().size(),
                                                     2.0 * std::numbers::pi / static_cast<double>(1u << bits), 0.1,
                                                     cfg.agent);
      } else {
        agent = std::make_unique<rl::DqnAgent>(2 * cfg.n_elements + cfg.n_users, env.actions().size(), cfg.agent,
                                               agent_rng);
      }
      rl::TrainingResult tr = rl::train_agent(env, *agent, cfg.agent, agent_rng, detail != nullptr);
      if (tr.best_states.empty()) {
        for (std::size_t t = 0; t < slots.size(); ++t) states.push_back(env.enter_slot(t, env.initial_state()));
      } else {
        states = std::move(tr.best_states);
      }
      episode_rewards = std::move(tr.episode_rewards);
      trace = std::move(tr.trace);
      rec.episode_final_reward = episode_rewards.empty() ? 0.0 : episode_rewards.back();
      break;
    }
    case Scheme::RandomPhase:
      for (std::size_t t = 0; t < slots.size(); ++t) {
        rl::StateVector s = fixed_state(cfg, slots[t]);
        SeededRng rng = root.derive(slot_label("random_phase/slot", t + 1));
        for (auto& th : s.thetas) th = wrap_phase(rng.uniform(0.0, 2.0 * std::numbers::pi));
        states.push_back(std::move(s));
      }
      break;
    case Scheme::NoIrs:
      for (const auto& ctx : slots) states.push_back(fixed_state(cfg, ctx));
      break;
  }

  std::size_t feasible = 0;
  std::vector<noma::RateReport> reports;
  for (std::size_t t = 0; t < slots.size(); ++t) {
    SlotScore sc = score_state(cfg, slots[t], states[t], true);
    rec.slot_sum_rates.push_back(sc.sum_rate);
    rec.sum_rate += sc.sum_rate;
    if (sc.sic_feasible) ++feasible;
    if (sc.report) reports.push_back(std::move(*sc.report));
  }
  rec.sic_feasible_fraction = static_cast<double>(feasible) / static_cast<double>(slots.size());

  if (detail) {
    detail->mobility = *mob;
    detail->slots = slots;
    detail->final_states = states;
    detail->reports = std::move(reports);
    detail->episode_rewards = std::move(episode_rewards);
    detail->trace = std::move(trace);
  }
  return rec;
}

SweepVariable parse_sweep_variable(const std::string& name) {
  if (name == "power") return SweepVariable::Power;
  if (name == "elements") return SweepVariable::Elements;
  if (name == "clusters") return SweepVariable::Clusters;
  if (name == "antennas") return SweepVariable::Antennas;
  throw InvalidArgument("unknown sweep variable '" + name + "'");
}

std::string sweep_variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::Power:
      return "power";
    case SweepVariable::Elements:
      return "elements";
    case SweepVariable::Clusters:
      return "clusters";
    case SweepVariable::Antennas:
      return "antennas";
  }
  throw InvalidArgument("sweep_variable_name: unknown variable");
}

ScenarioConfig with_sweep_value(ScenarioConfig cfg, SweepVariable v, double value) {
  auto as_count = [&] {
    if (!(value >= 1.0) || value != std::floor(value)) {
      throw InvalidArgument("sweep value must be a positive integer for " + sweep_variable_name(v));
    }
    return static_cast<std::size_t>(value);
  };
  switch (v) {
    case SweepVariable::Power:
      cfg.power_dbm = value;
      break;
    case SweepVariable::Elements:
      cfg.n_elements = as_count();
      break;
    case SweepVariable::Clusters:
      cfg.n_clusters = as_count();
      break;
    case SweepVariable::Antennas:
      cfg.n_antennas = as_count();
      break;
  }
  return cfg;
}

std::vector<MetricsRecord> sweep(const ScenarioConfig& base, SweepVariable variable, const std::vector<double>& values,
                                 const std::vector<Scheme>& schemes, MobilityCache* cache, const Progress& progress) {
  if (values.empty()) throw InvalidArgument("sweep: no values");
  if (schemes.empty()) throw InvalidArgument("sweep: no schemes");
  MobilityCache local;
  MobilityCache* mc = cache ? cache : &local;
  std::vector<MetricsRecord> out;
  for (Scheme scheme : schemes) {
    for (double value : values) {
      ScenarioConfig cfg = with_sweep_value(base, variable, value);
      cfg.scheme = scheme;
      for (std::size_t i = 0; i < cfg.seeds; ++i) {
        MetricsRecord r = run_pipeline(cfg, cfg.seed_base + i, mc);
        r.sweep_var = sweep_variable_name(variable);
        r.sweep_value = value;
        if (progress) progress(r);
        out.push_back(std::move(r));
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const MetricsRecord& a, const MetricsRecord& b) {
    if (a.scheme != b.scheme) return a.scheme < b.scheme;
    if (a.sweep_value != b.sweep_value) return a.sweep_value < b.sweep_value;
    return a.seed < b.seed;
  });
  return out;
}

std::vector<MetricsRecord> decoding_order_study(const ScenarioConfig& cfg, MobilityCache* cache,
                                                const Progress& progress) {
  MobilityCache local;
  MobilityCache* mc = cache ? cache : &local;
  std::vector<MetricsRecord> out;
  for (const char* mode : {"optimal", "random"}) {
    ScenarioConfig c = cfg;
    c.decoding_order = mode;
    for (std::size_t i = 0; i < c.seeds; ++i) {
      MetricsRecord r = run_pipeline(c, c.seed_base + i, mc);
      r.scheme = mode;
      r.sweep_var = "order";
      r.sweep_value = 0.0;
      if (progress) progress(r);
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::string format_csv(const std::vector<MetricsRecord>& records) {
  if (records.empty()) throw InvalidArgument("format_csv: no records");
  std::string out = "scheme,sweep_var,sweep_value,seed,slot,sum_rate,sic_feasible_fraction,episode_final_reward\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };
  for (const auto& r : records) {
    out += r.scheme + ',' + r.sweep_var + ',' + num(r.sweep_value) + ',' + std::to_string(r.seed) + ',' +
           std::to_string(r.slot) + ',' + num(r.sum_rate) + ',' + num(r.sic_feasible_fraction) + ',' +
           num(r.episode_final_reward) + '\n';
  }
  return out;
}

void emit_csv(const std::vector<MetricsRecord>& records, const std::string& path) {
  const std::string text = format_csv(records);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("emit_csv: cannot open '" + path + "'");
  f << text;
  if (!f) throw Error("emit_csv: write failed for '" + path + "'");
}

}  // namespace irsnoma::sim
