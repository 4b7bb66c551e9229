#include "irsnoma/mlp.hpp"

#include <cmath>
#include <utility>

#include "irsnoma/error.hpp"

namespace irsnoma::rl {

using Eigen::MatrixXd;

Mlp::Mlp(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw InvalidArgument("Mlp: need at least an input and an output layer");
  for (std::size_t s : sizes_) {
    if (s == 0) throw InvalidArgument("Mlp: layer sizes must be positive");
  }
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(off);
    off += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
  }
  params_.assign(off, 0.0);
}

Mlp Mlp::random(std::vector<std::size_t> layer_sizes, SeededRng& rng) {
  Mlp net(std::move(layer_sizes));
  for (std::size_t l = 0; l < net.layers(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(net.sizes_[l]));
    auto w = net.weight(l);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-limit, limit);
  }
  return net;
}

Eigen::Map<Eigen::MatrixXd> Mlp::weight(std::size_t layer) {
  return {params_.data() + offset(layer), static_cast<Eigen::Index>(sizes_[layer + 1]),
          static_cast<Eigen::Index>(sizes_[layer])};
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(std::size_t layer) const {
  return {params_.data() + offset(layer), static_cast<Eigen::Index>(sizes_[layer + 1]),
          static_cast<Eigen::Index>(sizes_[layer])};
}

Eigen::Map<Eigen::VectorXd> Mlp::bias(std::size_t layer) {
  return {params_.data() + offset(layer) + sizes_[layer + 1] * sizes_[layer],
          static_cast<Eigen::Index>(sizes_[layer + 1])};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(std::size_t layer) const {
  return {params_.data() + offset(layer) + sizes_[layer + 1] * sizes_[layer],
          static_cast<Eigen::Index>(sizes_[layer + 1])};
}

MatrixXd Mlp::forward(const MatrixXd& x) const {
  if (static_cast<std::size_t>(x.rows()) != input_dim()) throw DimensionMismatch("Mlp::forward: input dimension");
  MatrixXd a = x;
  for (std::size_t l = 0; l < layers(); ++l) {
    MatrixXd z = (weight(l) * a).colwise() + bias(l);
    a = l + 1 < layers() ? MatrixXd(z.cwiseMax(0.0)) : std::move(z);
  }
  if (!a.allFinite()) throw NumericalError("Mlp::forward: non-finite output");
  return a;
}

std::vector<double> Mlp::backward(const MatrixXd& x, const MatrixXd& d_out) const {
  std::vector<MatrixXd> acts{x};
  for (std::size_t l = 0; l < layers(); ++l) {
    MatrixXd z = (weight(l) * acts.back()).colwise() + bias(l);
    acts.push_back(l + 1 < layers() ? MatrixXd(z.cwiseMax(0.0)) : std::move(z));
  }
  if (d_out.rows() != acts.back().rows() || d_out.cols() != acts.back().cols()) {
    throw DimensionMismatch("Mlp::backward: output gradient shape");
  }
  Mlp grad(sizes_);
  MatrixXd delta = d_out;
  for (std::size_t l = layers(); l-- > 0;) {
    grad.weight(l) = delta * acts[l].transpose();
    grad.bias(l) = delta.rowwise().sum();
    if (l == 0) break;
    delta = (weight(l).transpose() * delta).cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
  }
  return std::move(grad.params_);
}

void Optimizer::step(std::vector<double>& params, const std::vector<double>& grad) {
  if (grad.size() != params.size()) throw DimensionMismatch("Optimizer::step: gradient size");
  if (kind_ == OptimizerKind::Sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr_ * grad[i];
    return;
  }
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  if (m_.size() != params.size()) {
    m_.assign(params.size(), 0.0);
    v_.assign(params.size(), 0.0);
    t_ = 0;
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1 * m_[i] + (1.0 - beta1) * grad[i];
    v_[i] = beta2 * v_[i] + (1.0 - beta2) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
  }
}

}  // namespace irsnoma::rl
