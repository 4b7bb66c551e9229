#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <map>
#include <memory>
#include <vector>

#include "irsnoma/mlp.hpp"
#include "irsnoma/rng.hpp"

namespace irsnoma::rl {

struct StateVector {
  std::vector<double> thetas;  // K phases in [0, 2*pi)
  std::vector<double> alphas;  // L amplitude coefficients

  friend bool operator==(const StateVector&, const StateVector&) = default;
};

struct AgentHyperparams {
  double tabular_learning_rate = 0.1;   // psi for the Q-table
  double network_learning_rate = 1e-3;  // psi for the Q-network
  double discount = 0.8;                // beta
  double epsilon_start = 1.0;
  double epsilon_min = 0.1;             // epsilon_0
  double epsilon_decay_fraction = 0.5;  // share of the episodes spent decaying to epsilon_min
  std::size_t episodes = 200;
  std::size_t steps_per_slot = 20;
  std::size_t replay_capacity = 10000;
  std::size_t minibatch = 32;
  std::size_t sync_period = 100;
  std::size_t hidden = 128;
  OptimizerKind optimizer = OptimizerKind::Adam;

  void validate() const;
  // Linear decay from epsilon_start to epsilon_min, then flat.
  double epsilon(std::size_t episode) const;
};

// Discrete actions: ids [0, K*2^B) set one element's phase to a grid point;
// ids [K*2^B, K*2^B + L*v) set one user's alpha to a power level.
struct ActionSpace {
  std::size_t k_elements = 0;
  std::size_t n_users = 0;
  unsigned phase_bits = 3;
  std::vector<double> power_levels{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

  struct Action {
    enum class Kind { Phase, Power };
    Kind kind = Kind::Phase;
    std::size_t target = 0;  // element or user
    double value = 0.0;      // phase in radians or alpha level
  };

  std::size_t phase_levels() const { return std::size_t{1} << phase_bits; }
  std::size_t size() const { return k_elements * phase_levels() + n_users * power_levels.size(); }
  Action decode(std::size_t id) const;
};

// Sets the chosen phase, or sets the chosen alpha and renormalises that
// user's cluster to sum to one.
StateVector apply_action(const StateVector& s, const ActionSpace& space, std::size_t id,
                         const std::vector<std::vector<std::size_t>>& clusters);

// [cos theta, sin theta, alpha], dimension 2K + L.
Eigen::VectorXd encode_state(const StateVector& s);

// Sum over users and slots of R(t) - R(t-1); rate_history[slot][user].
double reward(const std::vector<std::vector<double>>& rate_history);

class QTable {
 public:
  using Key = std::vector<long>;

  QTable(std::size_t n_actions, double phase_step, double alpha_step);

  Key key(const StateVector& s) const;
  // Zeros for a state never updated.
  std::vector<double> values(const Key& k) const;
  double get(const Key& k, std::size_t a) const;
  void set(const Key& k, std::size_t a, double v);
  std::size_t n_actions() const { return n_actions_; }
  std::size_t states() const { return table_.size(); }

 private:
  std::size_t n_actions_;
  double phase_step_;
  double alpha_step_;
  std::map<Key, std::vector<double>> table_;
};

// Q(s,a) += psi * (r + beta * max_a' Q(s',a') - Q(s,a)).
void q_learning_update(QTable& q, const QTable::Key& s, std::size_t a, double r, const QTable::Key& s_next,
                       const AgentHyperparams& hp);

// Argmax with the lowest index on ties, or a uniform action with probability epsilon.
std::size_t epsilon_greedy(const std::vector<double>& qvalues, double epsilon, SeededRng& rng);

struct Experience {
  StateVector s;
  std::size_t a = 0;
  double r = 0.0;
  StateVector s_next;
};

// FIFO ring buffer.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity = 10000);

  void push(Experience e);
  std::size_t size() const { return buffer_.size(); }
  std::size_t capacity() const { return capacity_; }
  // i = 0 is the oldest stored experience.
  const Experience& at(std::size_t i) const;
  // n distinct experiences, uniformly chosen.
  std::vector<const Experience*> sample(std::size_t n, SeededRng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot of the oldest entry once full
  std::vector<Experience> buffer_;
};

struct QNetworkMlp {
  Mlp online;
  Mlp target;
  std::size_t sync_period = 100;
  std::size_t train_steps = 0;

  // input -> hidden -> hidden -> n_actions, target initialised as a copy.
  static QNetworkMlp create(std::size_t input_dim, std::size_t hidden, std::size_t n_actions,
                            std::size_t sync_period, SeededRng& rng);
};

Eigen::VectorXd mlp_forward(const QNetworkMlp& net, const StateVector& s);

// Sum over the batch of (y - Q(s,a))^2 with y = r + beta * max Q_target(s').
// `grad` receives the gradient with respect to online's parameters.
double dqn_loss(const Mlp& online, const Mlp& target, const std::vector<const Experience*>& batch, double beta,
                std::vector<double>* grad);

// One optimiser step on a sampled minibatch; syncs the target every
// sync_period steps. Throws InvalidArgument when memory < minibatch.
double dqn_train_step(QNetworkMlp& net, Optimizer& opt, const ReplayMemory& memory, const AgentHyperparams& hp,
                      SeededRng& rng);

class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::size_t act(const StateVector& s, double epsilon, SeededRng& rng) = 0;
  // Returns the training loss, or NaN when no update ran.
  virtual double learn(const Experience& e, SeededRng& rng) = 0;
};

class DqnAgent : public Agent {
 public:
  DqnAgent(std::size_t input_dim, std::size_t n_actions, const AgentHyperparams& hp, SeededRng& rng);

  std::size_t act(const StateVector& s, double epsilon, SeededRng& rng) override;
  double learn(const Experience& e, SeededRng& rng) override;

  const QNetworkMlp& network() const { return net_; }
  const ReplayMemory& memory() const { return memory_; }

 private:
  AgentHyperparams hp_;
  QNetworkMlp net_;
  Optimizer opt_;
  ReplayMemory memory_;
};

class QLearningAgent : public Agent {
 public:
  QLearningAgent(std::size_t n_actions, double phase_step, double alpha_step, const AgentHyperparams& hp);

  std::size_t act(const StateVector& s, double epsilon, SeededRng& rng) override;
  double learn(const Experience& e, SeededRng& rng) override;

  const QTable& table() const { return q_; }

 private:
  AgentHyperparams hp_;
  QTable q_;
};

// The optimisation problem seen by an agent. Slots share one action space;
// the state carries over from one slot to the next.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::size_t num_slots() const = 0;
  virtual const ActionSpace& actions() const = 0;
  virtual StateVector initial_state() const = 0;
  // Adapts a carried-over state to the slot (e.g. renormalises alpha for new clusters).
  virtual StateVector enter_slot(std::size_t slot, const StateVector& s) const = 0;
  virtual StateVector apply(std::size_t slot, const StateVector& s, std::size_t action) const = 0;
  // Penalised sum-rate of the state under this slot's channels.
  virtual double objective(std::size_t slot, const StateVector& s) const = 0;
};

struct StepRecord {
  std::size_t episode = 0;
  std::size_t step = 0;
  std::size_t slot = 0;
  double epsilon = 0.0;
  std::size_t action = 0;
  double reward = 0.0;
  double loss = 0.0;  // NaN when no training step ran
  double sum_rate = 0.0;
};

struct EpisodeResult {
  std::vector<StepRecord> trace;
  double total_reward = 0.0;
  std::vector<StateVector> best_states;  // per slot
  std::vector<double> best_objective;    // per slot
};

// Per step: epsilon-greedy action, new state, reward = objective change
// under the slot's channels, learning update. Tracks the best state per slot.
EpisodeResult run_episode(const Environment& env, Agent& agent, const AgentHyperparams& hp, std::size_t episode,
                          SeededRng& rng);

struct TrainingResult {
  std::vector<double> episode_rewards;
  std::vector<StateVector> best_states;  // best over all episodes, per slot
  std::vector<double> best_objective;
  std::vector<StepRecord> trace;
};

TrainingResult train_agent(const Environment& env, Agent& agent, const AgentHyperparams& hp, SeededRng& rng,
                           bool keep_trace = false);

// Trailing moving average with partial windows at the start.
std::vector<double> moving_average(const std::vector<double>& v, std::size_t window);

}  // namespace irsnoma::rl
