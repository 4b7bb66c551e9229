#include <doctest.h>

#include <cmath>

#include "irsnoma/csv.hpp"
#include "irsnoma/error.hpp"
#include "irsnoma/lstm.hpp"
#include "irsnoma/mobility.hpp"

using namespace irsnoma;
using namespace irsnoma::mobility;

namespace {

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

// Element-by-element LSTM, written independently of the Eigen batch path.
Position scalar_forward(const LstmNetwork& net, const std::vector<Position>& seq) {
  using G = LstmNetwork;
  const std::size_t h = net.hidden_size();
  std::vector<double> r(h, 0.0), c(h, 0.0);
  for (const auto& p : seq) {
    const double x[2] = {p.x, p.y};
    std::vector<double> nr(h), nc(h);
    for (std::size_t j = 0; j < h; ++j) {
      double a[4];
      for (int g = 0; g < 4; ++g) {
        const auto gate = static_cast<G::Gate>(g);
        double s = net.w(gate)(j, 0) * x[0] + net.w(gate)(j, 1) * x[1];
        for (std::size_t k = 0; k < h; ++k) s += net.v(gate)(j, k) * r[k];
        if (gate != G::kCandidate) s += net.b(gate)(j);
        a[g] = s;
      }
      const double i = sigmoid(a[G::kInput]), f = sigmoid(a[G::kForget]), o = sigmoid(a[G::kOutput]);
      nc[j] = f * c[j] + i * std::tanh(a[G::kCandidate]);
      nr[j] = o * std::tanh(nc[j]);
    }
    r = nr;
    c = nc;
  }
  Position out{net.head_b()(0), net.head_b()(1)};
  for (std::size_t k = 0; k < h; ++k) {
    out.x += net.head_w()(0, k) * r[k];
    out.y += net.head_w()(1, k) * r[k];
  }
  return out;
}

Region unit_square() { return Region{0.0, 1.0, 0.0, 1.0, "uniform"}; }

std::vector<Eigen::MatrixXd> single_batch(const std::vector<Position>& seq) {
  std::vector<Eigen::MatrixXd> out;
  for (const auto& p : seq) {
    Eigen::MatrixXd m(2, 1);
    m << p.x, p.y;
    out.push_back(m);
  }
  return out;
}

}  // namespace

TEST_CASE("region mapping and density") {
  const Region r;
  CHECK_NOTHROW(r.validate());
  const Position p{25.0, 35.0};
  const Position n = r.normalize(p);
  CHECK(n.x == doctest::Approx(0.25));
  CHECK(n.y == doctest::Approx(0.75));
  const Position back = r.denormalize(n);
  CHECK(back.x == doctest::Approx(p.x));
  CHECK(back.y == doctest::Approx(p.y));
  CHECK(r.contains(p));
  CHECK_FALSE(r.contains({10.0, 30.0}));
  CHECK(r.clamp({10.0, 50.0}) == Position{20.0, 40.0});
  CHECK(r.density(p) <= r.density_sup());

  Region peaked = r;
  peaked.density_fn_id = "center_peaked";
  CHECK(peaked.density({30.0, 30.0}) > peaked.density({21.0, 21.0}));
  CHECK(peaked.density({30.0, 30.0}) <= peaked.density_sup());

  Region bad = r;
  bad.x_max = bad.x_min;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("uniform target with a tight envelope accepts every proposal") {
  auto sampler = AcceptRejectSampler::for_region(unit_square(), 3);
  SampleAudit audit;
  const auto pts = sample_initial_positions(sampler, 500, &audit);
  CHECK(pts.size() == 500);
  CHECK(audit.proposals == 500);
  for (bool a : audit.accepted) CHECK(a);
  for (const auto& p : pts) CHECK(unit_square().contains(p));
}

TEST_CASE("sampled positions pass a chi-square uniformity test") {
  auto sampler = AcceptRejectSampler::for_region(unit_square(), 11);
  const std::size_t n = 100000;
  const auto pts = sample_initial_positions(sampler, n);
  std::vector<double> counts(100, 0.0);
  for (const auto& p : pts) {
    const auto ix = std::min<std::size_t>(9, static_cast<std::size_t>(p.x * 10));
    const auto iy = std::min<std::size_t>(9, static_cast<std::size_t>(p.y * 10));
    counts[iy * 10 + ix] += 1.0;
  }
  const double expected = static_cast<double>(n) / 100.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // Upper 1% point of the chi-square distribution with 99 degrees of freedom.
  CHECK(chi2 < 134.642);
}

TEST_CASE("sampler rejects an empty request") {
  auto sampler = AcceptRejectSampler::for_region(Region{}, 1);
  CHECK_THROWS_AS(sample_initial_positions(sampler, 0), InvalidArgument);
}

TEST_CASE("motion with zero step stays put and is deterministic") {
  const Region r;
  const std::vector<Position> start{{25.0, 25.0}, {30.0, 38.0}};
  SeededRng a(4);
  const auto frozen = simulate_true_motion(start, r, 5, 0.0, a);
  REQUIRE(frozen.size() == 2);
  for (std::size_t u = 0; u < 2; ++u) {
    CHECK(frozen[u].user_id == u);
    REQUIRE(frozen[u].positions.size() == 6);
    for (const auto& p : frozen[u].positions) CHECK(p == start[u]);
  }
  SeededRng b1(9), b2(9);
  const auto m1 = simulate_true_motion(start, r, 5, 1.0, b1);
  const auto m2 = simulate_true_motion(start, r, 5, 1.0, b2);
  for (std::size_t u = 0; u < 2; ++u) CHECK(m1[u].positions == m2[u].positions);
  for (const auto& t : m1) {
    for (const auto& p : t.positions) CHECK(r.contains(p));
  }
}

TEST_CASE("one-step displacement has the configured spread") {
  const Region r{0.0, 1000.0, 0.0, 1000.0, "uniform"};
  const std::vector<Position> start(10000, Position{500.0, 500.0});
  SeededRng rng(77);
  const auto tr = simulate_true_motion(start, r, 1, 2.0, rng);
  double sx = 0.0, sy = 0.0;
  for (const auto& t : tr) {
    sx += std::pow(t.positions[1].x - 500.0, 2);
    sy += std::pow(t.positions[1].y - 500.0, 2);
  }
  CHECK(std::sqrt(sx / 10000.0) == doctest::Approx(2.0).epsilon(0.03));
  CHECK(std::sqrt(sy / 10000.0) == doctest::Approx(2.0).epsilon(0.03));
}

TEST_CASE("zero-weight LSTM predicts the head bias") {
  LstmNetwork net(4);
  net.head_b() << 0.3, -0.7;
  const auto f = lstm_forward(net, {{0.2, 0.4}, {0.5, 0.1}, {0.9, 0.9}});
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(f.trace.cell[t].norm() == 0.0);
    CHECK(f.trace.hidden[t].norm() == 0.0);
    CHECK(f.trace.input_gate[t](0) == doctest::Approx(0.5));
  }
  CHECK(f.prediction.x == doctest::Approx(0.3));
  CHECK(f.prediction.y == doctest::Approx(-0.7));
}

TEST_CASE("first cell state is input gate times candidate") {
  SeededRng rng(12);
  const LstmNetwork net = LstmNetwork::random(5, rng);
  const auto f = lstm_forward(net, {{0.3, 0.6}});
  const Eigen::VectorXd expect = f.trace.input_gate[0].cwiseProduct(f.trace.candidate[0]);
  CHECK((f.trace.cell[0] - expect).norm() == 0.0);
}

TEST_CASE("LSTM forward matches a scalar re-implementation") {
  SeededRng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const LstmNetwork net = LstmNetwork::random(6, rng);
    std::vector<Position> seq;
    for (int t = 0; t < 7; ++t) seq.push_back({rng.uniform(), rng.uniform()});
    const Position a = lstm_forward(net, seq).prediction;
    const Position b = scalar_forward(net, seq);
    CHECK(std::abs(a.x - b.x) < 1e-12);
    CHECK(std::abs(a.y - b.y) < 1e-12);
  }
}

TEST_CASE("the candidate gate has no bias") {
  LstmNetwork net(2);
  CHECK_THROWS_AS(net.b(LstmNetwork::kCandidate), InvalidArgument);
  CHECK_THROWS_AS(lstm_forward(net, {}), InvalidArgument);
  CHECK_THROWS_AS(LstmNetwork(0), InvalidArgument);
}

TEST_CASE("BPTT gradient matches central differences") {
  SeededRng rng(5);
  LstmNetwork net = LstmNetwork::random(3, rng);
  std::vector<Position> seq;
  for (int t = 0; t < 6; ++t) seq.push_back({rng.uniform(), rng.uniform()});
  const auto inputs = single_batch(seq);
  std::vector<double> grad;
  lstm_loss(net, inputs, &grad);
  REQUIRE(grad.size() == net.parameter_count());
  double gmax = 0.0;
  for (double g : grad) gmax = std::max(gmax, std::abs(g));
  const double h = 1e-6;
  for (std::size_t i = 0; i < net.parameter_count(); ++i) {
    // The candidate bias slot does not exist, so every index is a real parameter.
    const double keep = net.params()[i];
    net.params()[i] = keep + h;
    const double up = lstm_loss(net, inputs, nullptr);
    net.params()[i] = keep - h;
    const double down = lstm_loss(net, inputs, nullptr);
    net.params()[i] = keep;
    const double fd = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-2 * gmax});
    CHECK(std::abs(fd - grad[i]) / denom < 1e-4);
  }
}

TEST_CASE("training on a constant trajectory drives the loss down") {
  SeededRng rng(2);
  const LstmNetwork net = LstmNetwork::random(8, rng);
  const Region r;
  const std::vector<Trajectory> tr{{0, std::vector<Position>(10, Position{27.0, 33.0})}};
  LstmTrainConfig cfg;
  cfg.hidden_size = 8;
  cfg.epochs = 2000;
  cfg.learning_rate = 0.01;
  cfg.lr_drop_epoch = 1500;
  const auto res = lstm_train(net, tr, r, cfg);
  REQUIRE(res.losses.size() == 2000);
  CHECK(lstm_loss(res.net, single_batch(std::vector<Position>(10, r.normalize({27.0, 33.0}))), nullptr) < 1e-5);
}

TEST_CASE("zero epochs returns the network unchanged") {
  SeededRng rng(6);
  const LstmNetwork net = LstmNetwork::random(4, rng);
  LstmTrainConfig cfg;
  cfg.epochs = 0;
  cfg.hidden_size = 4;
  const auto res = lstm_train(net, {{0, {{21.0, 22.0}, {23.0, 24.0}}}}, Region{}, cfg);
  CHECK(res.net.params() == net.params());
  CHECK(res.losses.empty());
}

TEST_CASE("one prediction step yields one position and one retraining pass") {
  SeededRng rng(8);
  LstmNetwork net = LstmNetwork::random(4, rng);
  LstmTrainConfig cfg;
  cfg.hidden_size = 4;
  cfg.epochs = 8;
  const std::vector<Trajectory> hist{{0, {{21.0, 22.0}, {22.0, 23.0}, {23.0, 24.0}}},
                                     {1, {{35.0, 35.0}, {34.0, 35.0}, {33.0, 35.0}}}};
  PredictionStats stats;
  const auto out = predict_positions(net, hist, 1, Region{}, cfg, &stats);
  REQUIRE(out.size() == 2);
  for (const auto& t : out) {
    CHECK(t.positions.size() == 1);
    CHECK(Region{}.contains(t.positions[0]));
  }
  CHECK(stats.retrain_invocations == 1);
  CHECK(stats.final_losses.size() == 1);
}

TEST_CASE("static users are predicted where they stand") {
  const Region r;
  const std::vector<Position> spots{{24.0, 26.0}, {31.0, 37.0}, {38.0, 22.0}};
  std::vector<Trajectory> hist;
  for (std::size_t u = 0; u < spots.size(); ++u) hist.push_back({u, std::vector<Position>(10, spots[u])});
  SeededRng rng(19);
  LstmNetwork net = LstmNetwork::random(16, rng);
  LstmTrainConfig cfg;
  cfg.hidden_size = 16;
  cfg.epochs = 300;
  net = lstm_train(net, hist, r, cfg).net;
  const auto out = predict_positions(net, hist, 2, r, cfg);
  for (std::size_t u = 0; u < spots.size(); ++u) {
    for (const auto& p : out[u].positions) {
      const Position a = r.normalize(p), b = r.normalize(spots[u]);
      CHECK(std::hypot(a.x - b.x, a.y - b.y) < 0.05);
    }
  }
}

TEST_CASE("trajectory CSV round-trips exactly") {
  const std::vector<Trajectory> tr{{0, {{21.123456789012345, 22.5}, {23.0, 1.0 / 3.0}}},
                                   {1, {{35.0, 35.0}, {34.000000000000007, 35.0}}}};
  const auto back = csv::parse_trajectories(csv::format_trajectories(tr));
  REQUIRE(back.size() == 2);
  for (std::size_t u = 0; u < 2; ++u) {
    CHECK(back[u].user_id == tr[u].user_id);
    CHECK(back[u].positions == tr[u].positions);
  }
  CHECK_THROWS_AS(csv::parse_trajectories("bad,header\n"), InvalidArgument);
  CHECK_THROWS_AS(csv::parse_trajectories("user_id,slot,x_m,y_m\n0,0,1,2\n0,0,1,2\n"), InvalidArgument);
  CHECK_THROWS_AS(csv::parse_trajectories("user_id,slot,x_m,y_m\n0,1,1,2\n"), InvalidArgument);
  CHECK_THROWS_AS(csv::parse_trajectories("user_id,slot,x_m,y_m\n0,0,abc,2\n"), InvalidArgument);
}
