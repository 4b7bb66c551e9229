#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "irsnoma/mobility.hpp"
#include "irsnoma/rng.hpp"

namespace irsnoma::mobility {

// Single-layer LSTM over 2-D inputs with a linear 2-D output head. All
// parameters live in one flat vector so optimisers and gradient checks can
// treat them uniformly.
class LstmNetwork {
 public:
  enum Gate { kInput = 0, kForget = 1, kOutput = 2, kCandidate = 3 };
  static constexpr std::size_t kInputDim = 2;
  static constexpr std::size_t kOutputDim = 2;

  explicit LstmNetwork(std::size_t hidden_size = 200);

  // Glorot-uniform input and head weights, U(-1/sqrt(H), 1/sqrt(H))
  // recurrent weights, forget bias 1, other biases 0.
  static LstmNetwork random(std::size_t hidden_size, SeededRng& rng);

  std::size_t hidden_size() const { return hidden_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  using MatMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
  using VecMap = Eigen::Map<Eigen::VectorXd>;
  using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

  MatMap w(Gate g) { return {params_.data() + w_offset(g), ptrdiff(hidden_), ptrdiff(kInputDim)}; }
  ConstMatMap w(Gate g) const { return {params_.data() + w_offset(g), ptrdiff(hidden_), ptrdiff(kInputDim)}; }
  MatMap v(Gate g) { return {params_.data() + v_offset(g), ptrdiff(hidden_), ptrdiff(hidden_)}; }
  ConstMatMap v(Gate g) const { return {params_.data() + v_offset(g), ptrdiff(hidden_), ptrdiff(hidden_)}; }
  // The candidate gate has no bias; b(kCandidate) throws.
  VecMap b(Gate g) { return {params_.data() + b_offset(g), ptrdiff(hidden_)}; }
  ConstVecMap b(Gate g) const { return {params_.data() + b_offset(g), ptrdiff(hidden_)}; }
  MatMap head_w() { return {params_.data() + head_offset(), ptrdiff(kOutputDim), ptrdiff(hidden_)}; }
  ConstMatMap head_w() const { return {params_.data() + head_offset(), ptrdiff(kOutputDim), ptrdiff(hidden_)}; }
  VecMap head_b() { return {params_.data() + head_offset() + kOutputDim * hidden_, ptrdiff(kOutputDim)}; }
  ConstVecMap head_b() const {
    return {params_.data() + head_offset() + kOutputDim * hidden_, ptrdiff(kOutputDim)};
  }

  std::size_t w_offset(Gate g) const;
  std::size_t v_offset(Gate g) const;
  std::size_t b_offset(Gate g) const;
  std::size_t head_offset() const;

 private:
  static Eigen::Index ptrdiff(std::size_t n) { return static_cast<Eigen::Index>(n); }

  std::size_t hidden_;
  std::vector<double> params_;
};

// Per-step activations of one sequence; index t = 0 is the first input.
struct LstmTrace {
  std::vector<Eigen::VectorXd> input_gate, forget_gate, output_gate, candidate, cell, hidden;
  std::vector<Eigen::Vector2d> outputs;  // head applied to every hidden state
};

struct LstmForward {
  LstmTrace trace;
  Position prediction;  // head(r_T), normalised coordinates
};

// Inputs are region-normalised positions. Throws NumericalError on a
// non-finite activation and InvalidArgument on an empty sequence.
LstmForward lstm_forward(const LstmNetwork& net, const std::vector<Position>& sequence);

// Half mean squared one-step-ahead error over a batch of equal-length
// sequences (time-major: inputs[t] is 2 x B). When `grad` is non-null it
// receives dLoss/dparams by backpropagation through time.
double lstm_loss(const LstmNetwork& net, const std::vector<Eigen::MatrixXd>& inputs, std::vector<double>* grad);

struct LstmTrainConfig {
  std::size_t epochs = 300;
  double learning_rate = 0.005;
  double grad_clip_norm = 1.0;
  double lr_drop_factor = 0.2;
  std::size_t lr_drop_epoch = 125;  // the rate is multiplied by lr_drop_factor every lr_drop_epoch epochs
  std::size_t hidden_size = 200;
  std::size_t retrain_divisor = 4;  // warm-start retraining runs epochs / retrain_divisor epochs
  std::size_t early_stop_patience = 0;  // 0 disables early stopping

  void validate() const;
};

struct LstmTrainResult {
  LstmNetwork net;
  std::vector<double> losses;  // one per epoch, before that epoch's update
};

// Full-batch Adam with global-norm clipping. epochs == 0 returns `net`.
// Trajectories must share one length >= 2. Throws NumericalError on a NaN loss.
LstmTrainResult lstm_train(const LstmNetwork& net, const std::vector<Trajectory>& trajectories, const Region& region,
                           const LstmTrainConfig& cfg);

struct PredictionStats {
  std::size_t retrain_invocations = 0;
  std::vector<double> final_losses;
};

// Predict the next position of every user, append it to the training set,
// retrain from the current weights, repeat s times. Returned trajectories
// hold only the s predicted positions, clamped to the region.
std::vector<Trajectory> predict_positions(LstmNetwork& net, const std::vector<Trajectory>& history, std::size_t s,
                                          const Region& region, const LstmTrainConfig& cfg,
                                          PredictionStats* stats = nullptr);

}  // namespace irsnoma::mobility
