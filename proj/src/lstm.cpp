#include "irsnoma/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "irsnoma/error.hpp"

namespace irsnoma::mobility {

using Eigen::MatrixXd;
using Eigen::VectorXd;

LstmNetwork::LstmNetwork(std::size_t hidden_size) : hidden_(hidden_size) {
  if (hidden_size == 0) throw InvalidArgument("LstmNetwork: hidden size must be >= 1");
  params_.assign(head_offset() + kOutputDim * hidden_ + kOutputDim, 0.0);
}

std::size_t LstmNetwork::w_offset(Gate g) const { return static_cast<std::size_t>(g) * hidden_ * kInputDim; }

std::size_t LstmNetwork::v_offset(Gate g) const {
  return 4 * hidden_ * kInputDim + static_cast<std::size_t>(g) * hidden_ * hidden_;
}

std::size_t LstmNetwork::b_offset(Gate g) const {
  if (g == kCandidate) throw InvalidArgument("LstmNetwork: the candidate gate has no bias");
  return 4 * hidden_ * kInputDim + 4 * hidden_ * hidden_ + static_cast<std::size_t>(g) * hidden_;
}

std::size_t LstmNetwork::head_offset() const { return 4 * hidden_ * kInputDim + 4 * hidden_ * hidden_ + 3 * hidden_; }

LstmNetwork LstmNetwork::random(std::size_t hidden_size, SeededRng& rng) {
  LstmNetwork net(hidden_size);
  const double h = static_cast<double>(hidden_size);
  const double in_limit = std::sqrt(6.0 / (static_cast<double>(kInputDim) + 4.0 * h));
  const double rec_limit = 1.0 / std::sqrt(h);
  const double head_limit = std::sqrt(6.0 / (h + static_cast<double>(kOutputDim)));
  for (Gate g : {kInput, kForget, kOutput, kCandidate}) {
    auto w = net.w(g);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-in_limit, in_limit);
    auto v = net.v(g);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = rng.uniform(-rec_limit, rec_limit);
  }
  net.b(kForget).setOnes();
  auto hw = net.head_w();
  for (Eigen::Index i = 0; i < hw.size(); ++i) hw.data()[i] = rng.uniform(-head_limit, head_limit);
  return net;
}

namespace {

MatrixXd sigmoid(const MatrixXd& a) { return (1.0 + (-a.array()).exp()).inverse().matrix(); }

struct BatchCache {
  std::vector<MatrixXd> i, f, o, cand, c, tanh_c, r;
  std::vector<MatrixXd> y;
};

// Time-major batch forward. inputs[t] is 2 x B.
void batch_forward(const LstmNetwork& net, const std::vector<MatrixXd>& inputs, BatchCache& cache) {
  using G = LstmNetwork;
  const Eigen::Index h = static_cast<Eigen::Index>(net.hidden_size());
  const Eigen::Index batch = inputs.front().cols();
  MatrixXd r_prev = MatrixXd::Zero(h, batch);
  MatrixXd c_prev = MatrixXd::Zero(h, batch);
  for (const auto& x : inputs) {
    if (x.rows() != 2 || x.cols() != batch) throw DimensionMismatch("lstm: ragged input batch");
    MatrixXd ai = (net.w(G::kInput) * x + net.v(G::kInput) * r_prev).colwise() + net.b(G::kInput);
    MatrixXd af = (net.w(G::kForget) * x + net.v(G::kForget) * r_prev).colwise() + net.b(G::kForget);
    MatrixXd ao = (net.w(G::kOutput) * x + net.v(G::kOutput) * r_prev).colwise() + net.b(G::kOutput);
    MatrixXd ac = net.w(G::kCandidate) * x + net.v(G::kCandidate) * r_prev;
    cache.i.push_back(sigmoid(ai));
    cache.f.push_back(sigmoid(af));
    cache.o.push_back(sigmoid(ao));
    cache.cand.push_back(ac.array().tanh().matrix());
    MatrixXd c = cache.f.back().cwiseProduct(c_prev) + cache.i.back().cwiseProduct(cache.cand.back());
    MatrixXd tc = c.array().tanh().matrix();
    MatrixXd r = cache.o.back().cwiseProduct(tc);
    MatrixXd y = (net.head_w() * r).colwise() + net.head_b();
    if (!c.allFinite() || !r.allFinite() || !y.allFinite()) {
      throw NumericalError("lstm: non-finite activation at step " + std::to_string(cache.c.size()));
    }
    cache.c.push_back(c);
    cache.tanh_c.push_back(tc);
    cache.r.push_back(r);
    cache.y.push_back(std::move(y));
    c_prev = std::move(c);
    r_prev = std::move(r);
  }
}

std::vector<MatrixXd> to_batch(const std::vector<std::vector<Position>>& sequences) {
  if (sequences.empty()) throw InvalidArgument("lstm: no sequences");
  const std::size_t t_len = sequences.front().size();
  for (const auto& s : sequences) {
    if (s.size() != t_len) throw InvalidArgument("lstm: sequences must share one length");
  }
  std::vector<MatrixXd> out(t_len, MatrixXd(2, static_cast<Eigen::Index>(sequences.size())));
  for (std::size_t b = 0; b < sequences.size(); ++b) {
    for (std::size_t t = 0; t < t_len; ++t) {
      out[t](0, static_cast<Eigen::Index>(b)) = sequences[b][t].x;
      out[t](1, static_cast<Eigen::Index>(b)) = sequences[b][t].y;
    }
  }
  return out;
}

double adam_train(LstmNetwork& net, const std::vector<MatrixXd>& inputs, const LstmTrainConfig& cfg,
                  std::size_t epochs, std::vector<double>& losses) {
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  auto& p = net.params();
  std::vector<double> m(p.size(), 0.0), v(p.size(), 0.0), grad;
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  double loss = 0.0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    loss = lstm_loss(net, inputs, &grad);
    if (!std::isfinite(loss)) throw NumericalError("lstm_train: non-finite loss at epoch " + std::to_string(epoch));
    losses.push_back(loss);
    if (cfg.early_stop_patience > 0) {
      if (loss < best) {
        best = loss;
        since_best = 0;
      } else if (++since_best >= cfg.early_stop_patience) {
        break;
      }
    }
    double norm2 = 0.0;
    for (double g : grad) norm2 += g * g;
    const double norm = std::sqrt(norm2);
    const double clip = norm > cfg.grad_clip_norm ? cfg.grad_clip_norm / norm : 1.0;
    const double lr = cfg.learning_rate * std::pow(cfg.lr_drop_factor, static_cast<double>(epoch / cfg.lr_drop_epoch));
    const double t = static_cast<double>(epoch + 1);
    const double c1 = 1.0 - std::pow(beta1, t);
    const double c2 = 1.0 - std::pow(beta2, t);
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double g = grad[k] * clip;
      m[k] = beta1 * m[k] + (1.0 - beta1) * g;
      v[k] = beta2 * v[k] + (1.0 - beta2) * g * g;
      p[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
    }
  }
  return loss;
}

}  // namespace

LstmForward lstm_forward(const LstmNetwork& net, const std::vector<Position>& sequence) {
  if (sequence.empty()) throw InvalidArgument("lstm_forward: empty sequence");
  BatchCache cache;
  batch_forward(net, to_batch({sequence}), cache);
  LstmForward out;
  for (std::size_t t = 0; t < sequence.size(); ++t) {
    out.trace.input_gate.push_back(cache.i[t].col(0));
    out.trace.forget_gate.push_back(cache.f[t].col(0));
    out.trace.output_gate.push_back(cache.o[t].col(0));
    out.trace.candidate.push_back(cache.cand[t].col(0));
    out.trace.cell.push_back(cache.c[t].col(0));
    out.trace.hidden.push_back(cache.r[t].col(0));
    out.trace.outputs.push_back(cache.y[t].col(0));
  }
  out.prediction = {cache.y.back()(0, 0), cache.y.back()(1, 0)};
  return out;
}

double lstm_loss(const LstmNetwork& net, const std::vector<MatrixXd>& inputs, std::vector<double>* grad) {
  using G = LstmNetwork;
  if (inputs.size() < 2) throw InvalidArgument("lstm_loss: sequences need at least two points");
  BatchCache cache;
  batch_forward(net, inputs, cache);
  const std::size_t steps = inputs.size() - 1;
  const double batch = static_cast<double>(inputs.front().cols());
  const double scale = 1.0 / (batch * static_cast<double>(steps));

  double loss = 0.0;
  std::vector<MatrixXd> dy(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    dy[t] = cache.y[t] - inputs[t + 1];
    loss += 0.5 * scale * dy[t].squaredNorm();
    dy[t] *= scale;
  }
  if (!grad) return loss;

  LstmNetwork g(net.hidden_size());
  const Eigen::Index h = static_cast<Eigen::Index>(net.hidden_size());
  const Eigen::Index b = inputs.front().cols();
  MatrixXd dr_next = MatrixXd::Zero(h, b);
  MatrixXd dc_next = MatrixXd::Zero(h, b);
  const MatrixXd zeros = MatrixXd::Zero(h, b);
  for (std::size_t tt = steps; tt-- > 0;) {
    const MatrixXd& c_prev = tt > 0 ? cache.c[tt - 1] : zeros;
    const MatrixXd& r_prev = tt > 0 ? cache.r[tt - 1] : zeros;
    g.head_w() += dy[tt] * cache.r[tt].transpose();
    g.head_b() += dy[tt].rowwise().sum();
    const MatrixXd dr = net.head_w().transpose() * dy[tt] + dr_next;
    const MatrixXd& tc = cache.tanh_c[tt];
    const MatrixXd dc =
        dr.cwiseProduct(cache.o[tt]).cwiseProduct((1.0 - tc.array().square()).matrix()) + dc_next;
    const MatrixXd dao = dr.cwiseProduct(tc).cwiseProduct((cache.o[tt].array() * (1.0 - cache.o[tt].array())).matrix());
    const MatrixXd dai =
        dc.cwiseProduct(cache.cand[tt]).cwiseProduct((cache.i[tt].array() * (1.0 - cache.i[tt].array())).matrix());
    const MatrixXd daf =
        dc.cwiseProduct(c_prev).cwiseProduct((cache.f[tt].array() * (1.0 - cache.f[tt].array())).matrix());
    const MatrixXd dac = dc.cwiseProduct(cache.i[tt]).cwiseProduct((1.0 - cache.cand[tt].array().square()).matrix());
    dc_next = dc.cwiseProduct(cache.f[tt]);
    dr_next.setZero();
    const std::pair<G::Gate, const MatrixXd*> gates[] = {
        {G::kInput, &dai}, {G::kForget, &daf}, {G::kOutput, &dao}, {G::kCandidate, &dac}};
    for (const auto& [gate, da] : gates) {
      g.w(gate) += *da * inputs[tt].transpose();
      g.v(gate) += *da * r_prev.transpose();
      if (gate != G::kCandidate) g.b(gate) += da->rowwise().sum();
      dr_next += net.v(gate).transpose() * *da;
    }
  }
  *grad = std::move(g.params());
  return loss;
}

void LstmTrainConfig::validate() const {
  if (epochs == 0 || !(learning_rate > 0.0) || !(grad_clip_norm > 0.0) || !(lr_drop_factor > 0.0) ||
      lr_drop_epoch == 0 || hidden_size == 0 || retrain_divisor == 0) {
    throw InvalidArgument("LstmTrainConfig: all settings must be positive");
  }
  if (lr_drop_epoch >= epochs) throw InvalidArgument("LstmTrainConfig: lr_drop_epoch must be below epochs");
}

LstmTrainResult lstm_train(const LstmNetwork& net, const std::vector<Trajectory>& trajectories, const Region& region,
                           const LstmTrainConfig& cfg) {
  LstmTrainResult out{net, {}};
  if (cfg.epochs == 0) return out;
  cfg.validate();
  region.validate();
  std::vector<std::vector<Position>> seqs;
  for (const auto& t : trajectories) {
    if (t.positions.size() < 2) throw InvalidArgument("lstm_train: trajectory shorter than 2");
    std::vector<Position> s;
    for (const auto& p : t.positions) s.push_back(region.normalize(p));
    seqs.push_back(std::move(s));
  }
  adam_train(out.net, to_batch(seqs), cfg, cfg.epochs, out.losses);
  return out;
}

std::vector<Trajectory> predict_positions(LstmNetwork& net, const std::vector<Trajectory>& history, std::size_t s,
                                          const Region& region, const LstmTrainConfig& cfg, PredictionStats* stats) {
  if (s == 0) throw InvalidArgument("predict_positions: s must be >= 1");
  region.validate();
  std::vector<std::vector<Position>> seqs;
  for (const auto& t : history) {
    if (t.positions.empty()) throw InvalidArgument("predict_positions: empty history");
    std::vector<Position> seq;
    for (const auto& p : t.positions) seq.push_back(region.normalize(p));
    seqs.push_back(std::move(seq));
  }
  std::vector<Trajectory> out;
  for (const auto& t : history) out.push_back({t.user_id, {}});

  const std::size_t retrain_epochs = std::max<std::size_t>(1, cfg.epochs / cfg.retrain_divisor);
  for (std::size_t step = 0; step < s; ++step) {
    BatchCache cache;
    batch_forward(net, to_batch(seqs), cache);
    const MatrixXd& y = cache.y.back();
    for (std::size_t u = 0; u < seqs.size(); ++u) {
      const Position p{std::clamp(y(0, static_cast<Eigen::Index>(u)), 0.0, 1.0),
                       std::clamp(y(1, static_cast<Eigen::Index>(u)), 0.0, 1.0)};
      seqs[u].push_back(p);
      out[u].positions.push_back(region.denormalize(p));
    }
    std::vector<double> losses;
    const double final_loss = adam_train(net, to_batch(seqs), cfg, retrain_epochs, losses);
    if (stats) {
      ++stats->retrain_invocations;
      stats->final_losses.push_back(final_loss);
    }
  }
  return out;
}

}  // namespace irsnoma::mobility
