#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <utility>
#include <vector>

#include "irsnoma/rng.hpp"

namespace irsnoma::rl {

// Fully connected network with ReLU hidden layers and a linear output layer.
// Parameters are stored flat, layer by layer: W (out x in, column-major) then b.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<std::size_t> layer_sizes);

  // He-uniform weights, zero biases.
  static Mlp random(std::vector<std::size_t> layer_sizes, SeededRng& rng);

  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t output_dim() const { return sizes_.back(); }
  std::size_t layers() const { return sizes_.size() - 1; }
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  Eigen::Map<Eigen::MatrixXd> weight(std::size_t layer);
  Eigen::Map<const Eigen::MatrixXd> weight(std::size_t layer) const;
  Eigen::Map<Eigen::VectorXd> bias(std::size_t layer);
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;

  // Columns are samples. Throws NumericalError on a non-finite output.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

  // Gradient of sum(d_out .* forward(x)) with respect to the parameters.
  std::vector<double> backward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& d_out) const;

 private:
  std::size_t offset(std::size_t layer) const { return offsets_.at(layer); }

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

enum class OptimizerKind { Adam, Sgd };

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate) : kind_(kind), lr_(learning_rate) {}

  void step(std::vector<double>& params, const std::vector<double>& grad);
  double learning_rate() const { return lr_; }

 private:
  OptimizerKind kind_;
  double lr_;
  std::size_t t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace irsnoma::rl
