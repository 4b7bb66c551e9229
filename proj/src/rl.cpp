#include "irsnoma/rl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "irsnoma/error.hpp"

namespace irsnoma::rl {

void AgentHyperparams::validate() const {
  if (!(tabular_learning_rate > 0.0) || !(network_learning_rate > 0.0)) {
    throw InvalidArgument("hyperparams: learning rates must be positive");
  }
  if (!(discount >= 0.0 && discount < 1.0)) throw InvalidArgument("hyperparams: discount must lie in [0, 1)");
  if (!(epsilon_min >= 0.0 && epsilon_min <= 1.0) || !(epsilon_start >= 0.0 && epsilon_start <= 1.0)) {
    throw InvalidArgument("hyperparams: epsilon must lie in [0, 1]");
  }
  if (!(epsilon_decay_fraction >= 0.0 && epsilon_decay_fraction <= 1.0)) {
    throw InvalidArgument("hyperparams: epsilon_decay_fraction must lie in [0, 1]");
  }
  if (minibatch == 0 || replay_capacity < minibatch || sync_period == 0 || hidden == 0) {
    throw InvalidArgument("hyperparams: replay, minibatch, sync and hidden sizes must be positive");
  }
}

double AgentHyperparams::epsilon(std::size_t episode) const {
  const double decay = std::floor(epsilon_decay_fraction * static_cast<double>(episodes));
  if (decay <= 0.0) return epsilon_min;
  const double frac = std::min(1.0, static_cast<double>(episode) / decay);
  return epsilon_start + (epsilon_min - epsilon_start) * frac;
}

ActionSpace::Action ActionSpace::decode(std::size_t id) const {
  const std::size_t phase_actions = k_elements * phase_levels();
  if (id < phase_actions) {
    const std::size_t n = id % phase_levels();
    return {Action::Kind::Phase, id / phase_levels(),
            2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(phase_levels())};
  }
  const std::size_t p = id - phase_actions;
  if (p >= n_users * power_levels.size()) throw InvalidArgument("ActionSpace: action id " + std::to_string(id));
  return {Action::Kind::Power, p / power_levels.size(), power_levels[p % power_levels.size()]};
}

StateVector apply_action(const StateVector& s, const ActionSpace& space, std::size_t id,
                         const std::vector<std::vector<std::size_t>>& clusters) {
  const auto act = space.decode(id);
  StateVector out = s;
  if (act.kind == ActionSpace::Action::Kind::Phase) {
    out.thetas.at(act.target) = act.value;
    return out;
  }
  out.alphas.at(act.target) = act.value;
  for (const auto& members : clusters) {
    if (std::find(members.begin(), members.end(), act.target) == members.end()) continue;
    double sum = 0.0;
    for (std::size_t u : members) sum += out.alphas.at(u);
    for (std::size_t u : members) out.alphas[u] /= sum;
  }
  return out;
}

Eigen::VectorXd encode_state(const StateVector& s) {
  const std::size_t k = s.thetas.size();
  Eigen::VectorXd x(static_cast<Eigen::Index>(2 * k + s.alphas.size()));
  for (std::size_t i = 0; i < k; ++i) {
    x(static_cast<Eigen::Index>(2 * i)) = std::cos(s.thetas[i]);
    x(static_cast<Eigen::Index>(2 * i + 1)) = std::sin(s.thetas[i]);
  }
  for (std::size_t l = 0; l < s.alphas.size(); ++l) x(static_cast<Eigen::Index>(2 * k + l)) = s.alphas[l];
  return x;
}

double reward(const std::vector<std::vector<double>>& rate_history) {
  if (rate_history.empty()) throw InvalidArgument("reward: empty history");
  const std::size_t users = rate_history.front().size();
  for (const auto& slot : rate_history) {
    if (slot.size() != users) throw DimensionMismatch("reward: slots cover different user counts");
  }
  double r = 0.0;
  for (std::size_t l = 0; l < users; ++l) {
    for (std::size_t e = 1; e < rate_history.size(); ++e) r += rate_history[e][l] - rate_history[e - 1][l];
  }
  return r;
}

QTable::QTable(std::size_t n_actions, double phase_step, double alpha_step)
    : n_actions_(n_actions), phase_step_(phase_step), alpha_step_(alpha_step) {
  if (n_actions == 0 || !(phase_step > 0.0) || !(alpha_step > 0.0)) throw InvalidArgument("QTable: bad discretisation");
}

QTable::Key QTable::key(const StateVector& s) const {
  Key k;
  k.reserve(s.thetas.size() + s.alphas.size());
  const long levels = std::lround(2.0 * std::numbers::pi / phase_step_);
  for (double t : s.thetas) k.push_back(levels > 0 ? std::lround(t / phase_step_) % levels : 0);
  for (double a : s.alphas) k.push_back(std::lround(a / alpha_step_));
  return k;
}

std::vector<double> QTable::values(const Key& k) const {
  const auto it = table_.find(k);
  return it == table_.end() ? std::vector<double>(n_actions_, 0.0) : it->second;
}

double QTable::get(const Key& k, std::size_t a) const {
  if (a >= n_actions_) throw InvalidArgument("QTable: action out of range");
  const auto it = table_.find(k);
  return it == table_.end() ? 0.0 : it->second[a];
}

void QTable::set(const Key& k, std::size_t a, double v) {
  if (a >= n_actions_) throw InvalidArgument("QTable: action out of range");
  auto [it, inserted] = table_.try_emplace(k, n_actions_, 0.0);
  it->second[a] = v;
}

void q_learning_update(QTable& q, const QTable::Key& s, std::size_t a, double r, const QTable::Key& s_next,
                       const AgentHyperparams& hp) {
  const auto next = q.values(s_next);
  const double best_next = *std::max_element(next.begin(), next.end());
  const double old = q.get(s, a);
  q.set(s, a, old + hp.tabular_learning_rate * (r + hp.discount * best_next - old));
}

std::size_t epsilon_greedy(const std::vector<double>& qvalues, double epsilon, SeededRng& rng) {
  if (qvalues.empty()) throw InvalidArgument("epsilon_greedy: no actions");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidArgument("epsilon_greedy: epsilon outside [0, 1]");
  if (rng.uniform() < epsilon) return rng.uniform_index(qvalues.size());
  return static_cast<std::size_t>(std::max_element(qvalues.begin(), qvalues.end()) - qvalues.begin());
}

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InvalidArgument("ReplayMemory: capacity must be positive");
}

void ReplayMemory::push(Experience e) {
  if (!std::isfinite(e.r)) throw InvalidArgument("ReplayMemory: non-finite reward");
  if (buffer_.size() < capacity_) {
    buffer_.push_back(std::move(e));
    return;
  }
  buffer_[head_] = std::move(e);
  head_ = (head_ + 1) % capacity_;
}

const Experience& ReplayMemory::at(std::size_t i) const {
  if (i >= buffer_.size()) throw InvalidArgument("ReplayMemory: index out of range");
  return buffer_[(head_ + i) % buffer_.size()];
}

std::vector<const Experience*> ReplayMemory::sample(std::size_t n, SeededRng& rng) const {
  if (n > buffer_.size()) throw InvalidArgument("ReplayMemory: minibatch larger than memory");
  std::vector<std::size_t> picked;
  picked.reserve(n);
  while (picked.size() < n) {
    const std::size_t i = rng.uniform_index(buffer_.size());
    if (std::find(picked.begin(), picked.end(), i) == picked.end()) picked.push_back(i);
  }
  std::vector<const Experience*> out;
  out.reserve(n);
  for (std::size_t i : picked) out.push_back(&buffer_[i]);
  return out;
}

QNetworkMlp QNetworkMlp::create(std::size_t input_dim, std::size_t hidden, std::size_t n_actions,
                                std::size_t sync_period, SeededRng& rng) {
  QNetworkMlp q;
  q.online = Mlp::random({input_dim, hidden, hidden, n_actions}, rng);
  q.target = q.online;
  q.sync_period = sync_period;
  return q;
}

Eigen::VectorXd mlp_forward(const QNetworkMlp& net, const StateVector& s) {
  return net.online.forward(encode_state(s)).col(0);
}

double dqn_loss(const Mlp& online, const Mlp& target, const std::vector<const Experience*>& batch, double beta,
                std::vector<double>* grad) {
  if (batch.empty()) throw InvalidArgument("dqn_loss: empty batch");
  const auto n = static_cast<Eigen::Index>(batch.size());
  const auto in = static_cast<Eigen::Index>(online.input_dim());
  Eigen::MatrixXd s(in, n), s_next(in, n);
  for (Eigen::Index w = 0; w < n; ++w) {
    s.col(w) = encode_state(batch[static_cast<std::size_t>(w)]->s);
    s_next.col(w) = encode_state(batch[static_cast<std::size_t>(w)]->s_next);
  }
  const Eigen::MatrixXd q = online.forward(s);
  const Eigen::MatrixXd q_next = target.forward(s_next);
  Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(q.rows(), n);
  double loss = 0.0;
  for (Eigen::Index w = 0; w < n; ++w) {
    const Experience& e = *batch[static_cast<std::size_t>(w)];
    const auto a = static_cast<Eigen::Index>(e.a);
    if (a >= q.rows()) throw InvalidArgument("dqn_loss: action out of range");
    const double y = e.r + beta * q_next.col(w).maxCoeff();
    const double diff = y - q(a, w);
    loss += diff * diff;
    d_out(a, w) = -2.0 * diff;
  }
  if (grad) *grad = online.backward(s, d_out);
  return loss;
}

double dqn_train_step(QNetworkMlp& net, Optimizer& opt, const ReplayMemory& memory, const AgentHyperparams& hp,
                      SeededRng& rng) {
  if (memory.size() < hp.minibatch) throw InvalidArgument("dqn_train_step: memory smaller than minibatch");
  const auto batch = memory.sample(hp.minibatch, rng);
  std::vector<double> grad;
  const double loss = dqn_loss(net.online, net.target, batch, hp.discount, &grad);
  opt.step(net.online.params(), grad);
  ++net.train_steps;
  if (net.train_steps % net.sync_period == 0) net.target = net.online;
  return loss;
}

DqnAgent::DqnAgent(std::size_t input_dim, std::size_t n_actions, const AgentHyperparams& hp, SeededRng& rng)
    : hp_(hp),
      net_(QNetworkMlp::create(input_dim, hp.hidden, n_actions, hp.sync_period, rng)),
      opt_(hp.optimizer, hp.network_learning_rate),
      memory_(hp.replay_capacity) {
  hp.validate();
}

std::size_t DqnAgent::act(const StateVector& s, double epsilon, SeededRng& rng) {
  if (rng.uniform() < epsilon) return rng.uniform_index(net_.online.output_dim());
  const Eigen::VectorXd q = mlp_forward(net_, s);
  Eigen::Index best = 0;
  q.maxCoeff(&best);
  return static_cast<std::size_t>(best);
}

double DqnAgent::learn(const Experience& e, SeededRng& rng) {
  memory_.push(e);
  if (memory_.size() < hp_.minibatch) return std::numeric_limits<double>::quiet_NaN();
  return dqn_train_step(net_, opt_, memory_, hp_, rng);
}

QLearningAgent::QLearningAgent(std::size_t n_actions, double phase_step, double alpha_step,
                               const AgentHyperparams& hp)
    : hp_(hp), q_(n_actions, phase_step, alpha_step) {
  hp.validate();
}

std::size_t QLearningAgent::act(const StateVector& s, double epsilon, SeededRng& rng) {
  return epsilon_greedy(q_.values(q_.key(s)), epsilon, rng);
}

double QLearningAgent::learn(const Experience& e, SeededRng&) {
  q_learning_update(q_, q_.key(e.s), e.a, e.r, q_.key(e.s_next), hp_);
  return std::numeric_limits<double>::quiet_NaN();
}

EpisodeResult run_episode(const Environment& env, Agent& agent, const AgentHyperparams& hp, std::size_t episode,
                          SeededRng& rng) {
  EpisodeResult out;
  const std::size_t slots = env.num_slots();
  if (slots == 0) return out;
  const double eps = hp.epsilon(episode);
  StateVector state = env.initial_state();
  std::size_t step = 0;
  for (std::size_t slot = 0; slot < slots; ++slot) {
    state = env.enter_slot(slot, state);
    double obj = env.objective(slot, state);
    out.best_states.push_back(state);
    out.best_objective.push_back(obj);
    for (std::size_t i = 0; i < hp.steps_per_slot; ++i, ++step) {
      const std::size_t a = agent.act(state, eps, rng);
      StateVector next = env.apply(slot, state, a);
      const double next_obj = env.objective(slot, next);
      const double r = next_obj - obj;
      const double loss = agent.learn({state, a, r, next}, rng);
      out.trace.push_back({episode, step, slot, eps, a, r, loss, next_obj});
      out.total_reward += r;
      if (next_obj > out.best_objective[slot]) {
        out.best_objective[slot] = next_obj;
        out.best_states[slot] = next;
      }
      state = std::move(next);
      obj = next_obj;
    }
  }
  return out;
}

TrainingResult train_agent(const Environment& env, Agent& agent, const AgentHyperparams& hp, SeededRng& rng,
                           bool keep_trace) {
  hp.validate();
  TrainingResult out;
  for (std::size_t ep = 0; ep < hp.episodes; ++ep) {
    EpisodeResult r = run_episode(env, agent, hp, ep, rng);
    out.episode_rewards.push_back(r.total_reward);
    if (out.best_states.empty()) {
      out.best_states = r.best_states;
      out.best_objective = r.best_objective;
    } else {
      for (std::size_t s = 0; s < r.best_objective.size(); ++s) {
        if (r.best_objective[s] > out.best_objective[s]) {
          out.best_objective[s] = r.best_objective[s];
          out.best_states[s] = r.best_states[s];
        }
      }
    }
    if (keep_trace) out.trace.insert(out.trace.end(), r.trace.begin(), r.trace.end());
  }
  return out;
}

std::vector<double> moving_average(const std::vector<double>& v, std::size_t window) {
  if (window == 0) throw InvalidArgument("moving_average: window must be positive");
  std::vector<double> out;
  out.reserve(v.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    acc += v[i];
    if (i >= window) acc -= v[i - window];
    out.push_back(acc / static_cast<double>(std::min(window, i + 1)));
  }
  return out;
}

}  // namespace irsnoma::rl
