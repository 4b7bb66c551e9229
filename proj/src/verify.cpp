#include "irsnoma/verify.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "irsnoma/clustering.hpp"
#include "irsnoma/error.hpp"
#include "irsnoma/lstm.hpp"
#include "irsnoma/mobility.hpp"
#include "irsnoma/noma.hpp"
#include "irsnoma/rl.hpp"

namespace irsnoma::verify {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <typename Body>
CriterionResult timed(int id, std::string name, Body&& body) {
  const auto start = Clock::now();
  CriterionResult r{id, std::move(name), false, {}, 0.0};
  try {
    body(r);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

ComplexVector random_row(SeededRng& rng, std::size_t n, double scale) {
  ComplexVector v = sample_standard_complex_gaussian(rng, n);
  for (auto& z : v) z *= scale;
  return v;
}

// Independent log-likelihood of an isotropic mixture, accumulated in long double.
long double oracle_log_likelihood(const std::vector<clustering::FeatureVector>& x, const clustering::GmmParams& p) {
  long double total = 0.0L;
  for (const auto& xi : x) {
    std::vector<long double> terms;
    for (std::size_t c = 0; c < p.size(); ++c) {
      long double sq = 0.0L;
      for (std::size_t j = 0; j < xi.size(); ++j) {
        const long double diff = static_cast<long double>(xi[j]) - p.means[c][j];
        sq += diff * diff;
      }
      const long double var = p.variances[c];
      terms.push_back(std::log(static_cast<long double>(p.weights[c])) -
                      0.5L * static_cast<long double>(xi.size()) * std::log(2.0L * std::numbers::pi_v<long double> * var) -
                      sq / (2.0L * var));
    }
    const long double mx = *std::max_element(terms.begin(), terms.end());
    long double s = 0.0L;
    for (long double t : terms) s += std::exp(t - mx);
    total += mx + std::log(s);
  }
  return total;
}

clustering::CsiSet random_dataset(SeededRng& rng, std::size_t l, std::size_t d, std::size_t groups) {
  std::vector<clustering::FeatureVector> centers(groups, clustering::FeatureVector(d));
  for (auto& c : centers) {
    for (auto& v : c) v = 3.0 * rng.normal();
  }
  clustering::CsiSet csi;
  for (std::size_t u = 0; u < l; ++u) {
    clustering::FeatureVector x = centers[rng.uniform_index(groups)];
    for (auto& v : x) v += rng.normal();
    csi.features.push_back(std::move(x));
  }
  return csi;
}

double relative_gradient_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  double scale = 0.0;
  for (double g : analytic) scale = std::max(scale, std::abs(g));
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-2 * scale, 1e-12});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

template <typename Loss>
std::vector<double> central_differences(std::vector<double>& params, Loss&& loss, double h) {
  std::vector<double> out(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = loss();
    params[i] = saved - h;
    const double down = loss();
    params[i] = saved;
    out[i] = (up - down) / (2.0 * h);
  }
  return out;
}

double mean_of(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(begin), v.begin() + static_cast<std::ptrdiff_t>(end),
                         0.0) /
         static_cast<double>(end - begin);
}

}  // namespace

CriterionResult zf_correctness(std::uint64_t seed, std::size_t instances) {
  return timed(1, "ZF correctness", [&](CriterionResult& r) {
    SeededRng rng(seed);
    constexpr std::size_t n = 10;
    double worst_off = 0.0, worst_diag = 0.0;
    for (std::size_t it = 0; it < instances; ++it) {
      const std::size_t m = 1 + rng.uniform_index(5);
      std::vector<ComplexVector> rows;
      for (std::size_t i = 0; i < m; ++i) rows.push_back(random_row(rng, n, std::pow(10.0, rng.uniform(-4.0, 0.0))));
      const noma::PrecodingMatrix w = noma::zf_precoder(rows, 1.0);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          cdouble g{0.0, 0.0};
          for (std::size_t k = 0; k < n; ++k) g += rows[i][k] * w.w(k, j);
          if (i == j) {
            worst_diag = std::max(worst_diag, std::abs(g - cdouble{1.0, 0.0}));
          } else {
            worst_off = std::max(worst_off, std::abs(g));
          }
        }
      }
    }
    r.pass = worst_off <= 1e-8 && worst_diag <= 1e-8;
    r.detail = std::to_string(instances) + " instances, max |off-diag| " + fmt("%.2e", worst_off) +
               ", max |diag - 1| " + fmt("%.2e", worst_diag) + " (tol 1e-8)";
  });
}

CriterionResult em_monotonicity(std::uint64_t seed, std::size_t datasets) {
  return timed(2, "EM monotonicity", [&](CriterionResult& r) {
    SeededRng rng(seed);
    std::size_t violations = 0, steps = 0;
    double worst_drop = 0.0, worst_ll_mismatch = 0.0;
    for (std::size_t it = 0; it < datasets; ++it) {
      const std::size_t d = 2 + rng.uniform_index(19);
      const std::size_t m = 1 + rng.uniform_index(5);
      const clustering::CsiSet csi = random_dataset(rng, 10, d, m);
      SeededRng fit_rng = rng.derive("fit" + std::to_string(it));
      clustering::GmmParams p = clustering::fit_kgmm(csi, m, 1e-15, fit_rng, 0).params;
      long double prev = oracle_log_likelihood(csi.features, p);
      for (std::size_t step = 0; step < 200; ++step) {
        p = clustering::m_step(csi, clustering::e_step(csi, p));
        const long double cur = oracle_log_likelihood(csi.features, p);
        const double lib = clustering::log_likelihood(csi, p);
        worst_ll_mismatch = std::max(worst_ll_mismatch, static_cast<double>(std::abs(cur - lib) / std::max(1.0L, std::abs(cur))));
        const double drop = static_cast<double>((prev - cur) / std::max(1.0L, std::abs(prev)));
        ++steps;
        if (drop > 1e-9) ++violations;
        worst_drop = std::max(worst_drop, drop);
        if (std::abs(cur - prev) < 1e-13L * std::max(1.0L, std::abs(cur))) break;
        prev = cur;
      }
      // The fitter's own record must agree.
      const auto fit = clustering::fit_kgmm(csi, m, 1e-15, fit_rng);
      for (std::size_t k = 1; k < fit.log_likelihoods.size(); ++k) {
        const double a = fit.log_likelihoods[k - 1], b = fit.log_likelihoods[k];
        if ((a - b) / std::max(1.0, std::abs(a)) > 1e-9) ++violations;
      }
    }
    r.pass = violations == 0 && worst_ll_mismatch <= 1e-9;
    r.detail = std::to_string(datasets) + " datasets, " + std::to_string(steps) + " EM steps, " +
               std::to_string(violations) + " decreases beyond 1e-9 (largest relative drop " + fmt("%.2e", worst_drop) +
               "), library vs oracle log-likelihood " + fmt("%.1e", worst_ll_mismatch);
  });
}

CriterionResult kmeans_reduction(std::uint64_t seed, std::size_t datasets) {
  return timed(3, "K-means reduction", [&](CriterionResult& r) {
    SeededRng rng(seed);
    std::size_t mismatches = 0, points = 0;
    for (std::size_t it = 0; it < datasets; ++it) {
      const std::size_t d = 2 + rng.uniform_index(19);
      const std::size_t m = 1 + rng.uniform_index(5);
      const clustering::CsiSet csi = random_dataset(rng, 10, d, m);
      SeededRng km_rng = rng.derive("km" + std::to_string(it));
      const clustering::KmeansResult km = clustering::kmeans_seed(csi, m, km_rng);
      clustering::GmmParams p;
      const double shared = std::pow(10.0, rng.uniform(-1.0, 1.0));
      for (std::size_t c = 0; c < m; ++c) {
        p.weights.push_back(1.0 / static_cast<double>(m));
        p.means.push_back(km.centers[c]);
        p.variances.push_back(shared);
      }
      const clustering::Responsibilities resp = clustering::e_step(csi, p);
      for (std::size_t u = 0; u < csi.size(); ++u) {
        std::size_t nearest = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < m; ++c) {
          double sq = 0.0;
          for (std::size_t j = 0; j < d; ++j) sq += (csi.features[u][j] - km.centers[c][j]) * (csi.features[u][j] - km.centers[c][j]);
          if (sq < best) {
            best = sq;
            nearest = c;
          }
        }
        const auto map = static_cast<std::size_t>(std::max_element(resp.r[u].begin(), resp.r[u].end()) - resp.r[u].begin());
        ++points;
        if (map != nearest || (km.iterations < 100 && km.assignment[u] != nearest)) ++mismatches;
      }
    }
    r.pass = mismatches == 0;
    r.detail = std::to_string(datasets) + " datasets, " + std::to_string(points) + " points, " +
               std::to_string(mismatches) + " MAP / nearest-center / K-means disagreements";
  });
}

CriterionResult proposition1(std::uint64_t seed, std::size_t instances) {
  return timed(4, "Proposition 1 (SIC cross-rate)", [&](CriterionResult& r) {
    SeededRng rng(seed);
    std::size_t violations = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < instances; ++it) {
      constexpr std::size_t n = 4;
      noma::LinkState link;
      link.user_rows = {random_row(rng, n, std::pow(10.0, rng.uniform(-1.0, 1.0))),
                        random_row(rng, n, std::pow(10.0, rng.uniform(-1.0, 1.0)))};
      link.clusters.members = {{0, 1}};
      link.precoder = noma::zf_precoder({random_row(rng, n, 1.0)}, 1.0);
      const double a0 = rng.uniform(0.05, 0.95);
      link.alloc.alpha = {a0, 1.0 - a0};
      link.alloc.total_power_w = 1.0;
      link.noise_w = std::pow(10.0, rng.uniform(-3.0, 1.0));
      const noma::DecodingOrder order = noma::gain_ascending_order(link);
      const std::size_t first = order.sequence[0][0], second = order.sequence[0][1];
      const double own = noma::rate(noma::sinr_own(link, order, first));
      const double cross = noma::rate(noma::sinr_cross(link, order, second, first));
      worst = std::max(worst, own - cross);
      if (own - cross > 1e-9) ++violations;
    }
    r.pass = violations == 0;
    r.detail = std::to_string(instances) + " instances, " + std::to_string(violations) +
               " violations beyond 1e-9, max(R_own - R_cross) " + fmt("%.2e", worst);
  });
}

CriterionResult gradient_fidelity(std::uint64_t seed) {
  return timed(5, "Gradient fidelity", [&](CriterionResult& r) {
    SeededRng rng(seed);
    // LSTM, hidden 5: 167 parameters.
    mobility::LstmNetwork net = mobility::LstmNetwork::random(5, rng);
    std::vector<Eigen::MatrixXd> seq;
    for (int t = 0; t < 5; ++t) {
      Eigen::MatrixXd x(2, 3);
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
      seq.push_back(x);
    }
    std::vector<double> g_lstm;
    mobility::lstm_loss(net, seq, &g_lstm);
    const auto fd_lstm = central_differences(net.params(), [&] { return mobility::lstm_loss(net, seq, nullptr); }, 1e-6);
    const double e_lstm = relative_gradient_error(g_lstm, fd_lstm);

    // Q-network 6 -> 8 -> 8 -> 4: 164 parameters.
    rl::Mlp online = rl::Mlp::random({6, 8, 8, 4}, rng);
    const rl::Mlp target = rl::Mlp::random({6, 8, 8, 4}, rng);
    std::vector<rl::Experience> exps;
    auto random_state = [&] {
      rl::StateVector s;
      for (int k = 0; k < 2; ++k) s.thetas.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
      for (int l = 0; l < 2; ++l) s.alphas.push_back(rng.uniform(0.1, 1.0));
      return s;
    };
    for (int i = 0; i < 6; ++i) exps.push_back({random_state(), rng.uniform_index(4), rng.uniform(-1.0, 1.0), random_state()});
    std::vector<const rl::Experience*> batch;
    for (const auto& e : exps) batch.push_back(&e);
    std::vector<double> g_mlp;
    rl::dqn_loss(online, target, batch, 0.8, &g_mlp);
    const auto fd_mlp = central_differences(online.params(), [&] { return rl::dqn_loss(online, target, batch, 0.8, nullptr); }, 1e-6);
    const double e_mlp = relative_gradient_error(g_mlp, fd_mlp);

    r.pass = e_lstm <= 1e-4 && e_mlp <= 1e-4;
    r.detail = "LSTM (" + std::to_string(net.parameter_count()) + " params) rel err " + fmt("%.2e", e_lstm) +
               ", Q-network (" + std::to_string(online.params().size()) + " params) rel err " + fmt("%.2e", e_mlp) +
               " (tol 1e-4)";
  });
}

CriterionResult sampler_uniformity(std::uint64_t seed, std::size_t samples) {
  return timed(6, "Sampler uniformity", [&](CriterionResult& r) {
    const mobility::Region region;
    auto sampler = mobility::AcceptRejectSampler::for_region(region, seed);
    const auto pts = mobility::sample_initial_positions(sampler, samples);
    std::vector<double> counts(100, 0.0);
    for (const auto& p : pts) {
      const auto bx = std::min<std::size_t>(9, static_cast<std::size_t>(10.0 * (p.x - region.x_min) / (region.x_max - region.x_min)));
      const auto by = std::min<std::size_t>(9, static_cast<std::size_t>(10.0 * (p.y - region.y_min) / (region.y_max - region.y_min)));
      counts[by * 10 + bx] += 1.0;
    }
    const double expected = static_cast<double>(samples) / 100.0;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    const double p_value = boost::math::gamma_q(99.0 / 2.0, chi2 / 2.0);
    r.pass = p_value > 0.01;
    r.detail = std::to_string(samples) + " samples, chi2 " + fmt("%.1f", chi2) + " on 99 dof, p = " + fmt("%.3f", p_value);
  });
}

CriterionResult reward_telescoping(std::uint64_t seed, std::size_t traces) {
  return timed(13, "Reward telescoping", [&](CriterionResult& r) {
    SeededRng rng(seed);
    double worst = 0.0;
    for (std::size_t it = 0; it < traces; ++it) {
      const std::size_t slots = 2 + rng.uniform_index(6);
      const std::size_t users = 1 + rng.uniform_index(10);
      std::vector<std::vector<double>> hist(slots, std::vector<double>(users));
      for (auto& row : hist) {
        for (auto& v : row) v = rng.uniform(0.0, 10.0);
      }
      double expected = 0.0;
      for (std::size_t u = 0; u < users; ++u) expected += hist.back()[u] - hist.front()[u];
      worst = std::max(worst, std::abs(rl::reward(hist) - expected));
    }
    r.pass = worst <= 1e-12;
    r.detail = std::to_string(traces) + " traces, max |double sum - (last - first)| " + fmt("%.2e", worst);
  });
}

TrendSuite::TrendSuite(TrendOptions opts, sim::Progress progress)
    : opts_(std::move(opts)), progress_(std::move(progress)) {}

const std::vector<TrendSuite::Run>& TrendSuite::runs(sim::Scheme scheme, double power_dbm, std::size_t elements,
                                                     const std::string& order) {
  const std::string key = sim::scheme_name(scheme) + '|' + fmt("%g", power_dbm) + '|' + std::to_string(elements) + '|' + order;
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  sim::ScenarioConfig cfg = opts_.base;
  cfg.scheme = scheme;
  cfg.power_dbm = power_dbm;
  cfg.n_elements = elements;
  cfg.decoding_order = order;
  std::vector<Run> out;
  for (std::size_t i = 0; i < cfg.seeds; ++i) {
    Run run;
    run.record = sim::run_pipeline(cfg, cfg.seed_base + i, &cache_, &run.detail);
    run.record.sweep_var = "power";
    run.record.sweep_value = power_dbm;
    run.detail.trace.clear();
    run.detail.mobility = {};
    if (progress_) progress_(run.record);
    out.push_back(std::move(run));
  }
  return memo_.emplace(key, std::move(out)).first->second;
}

double TrendSuite::mean(sim::Scheme scheme, double power_dbm, std::size_t elements) {
  const auto& rs = runs(scheme, power_dbm, elements);
  double s = 0.0;
  for (const auto& r : rs) s += r.record.sum_rate;
  return s / static_cast<double>(rs.size());
}

CriterionResult TrendSuite::power_trend() {
  return timed(7, "Trend: power", [&](CriterionResult& r) {
    using sim::Scheme;
    r.pass = true;
    for (Scheme s : {Scheme::DqnContinuous, Scheme::Dqn2Bit, Scheme::Dqn1Bit, Scheme::QLearning, Scheme::RandomPhase}) {
      r.detail += sim::scheme_name(s) + " [";
      double prev = -1.0;
      for (double p : {10.0, 20.0, 30.0, 40.0}) {
        const double m = mean(s, p, opts_.base.n_elements);
        if (!(m > prev)) r.pass = false;
        r.detail += fmt(prev < 0.0 ? "%.2f" : " %.2f", m);
        prev = m;
      }
      r.detail += "] ";
    }
    r.detail += "at P = 10/20/30/40 dBm, " + std::to_string(opts_.base.seeds) + " seeds";
  });
}

CriterionResult TrendSuite::scheme_ordering() {
  return timed(8, "Trend: scheme ordering", [&](CriterionResult& r) {
    using sim::Scheme;
    r.pass = true;
    double prev = std::numeric_limits<double>::infinity();
    for (Scheme s : {Scheme::DqnContinuous, Scheme::Dqn2Bit, Scheme::Dqn1Bit, Scheme::RandomPhase, Scheme::NoIrs}) {
      const double m = mean(s, 20.0, opts_.base.n_elements);
      if (m > prev) r.pass = false;
      r.detail += (std::isinf(prev) ? "" : " >= ") + sim::scheme_name(s) + fmt(" %.3f", m);
      prev = m;
    }
    r.detail += " at 20 dBm";
  });
}

CriterionResult TrendSuite::elements_trend() {
  return timed(9, "Trend: IRS elements", [&](CriterionResult& r) {
    using sim::Scheme;
    r.pass = true;
    const std::vector<std::size_t> ks{10, 20, 30};
    for (Scheme s : {Scheme::DqnContinuous, Scheme::Dqn2Bit, Scheme::Dqn1Bit}) {
      r.detail += sim::scheme_name(s) + " [";
      double prev = -1.0;
      for (std::size_t k : ks) {
        const double m = mean(s, 20.0, k);
        if (m < prev) r.pass = false;
        r.detail += fmt(prev < 0.0 ? "%.2f" : " %.2f", m);
        prev = m;
      }
      r.detail += "] ";
    }
    // no_irs must not depend on K at all, seed by seed.
    std::size_t differing = 0;
    const auto& base = runs(Scheme::NoIrs, 20.0, ks.front());
    for (std::size_t k : ks) {
      const auto& other = runs(Scheme::NoIrs, 20.0, k);
      for (std::size_t i = 0; i < base.size(); ++i) {
        if (other[i].record.sum_rate != base[i].record.sum_rate) ++differing;
      }
    }
    if (differing != 0) r.pass = false;
    r.detail += "no_irs " + fmt("%.3f", mean(Scheme::NoIrs, 20.0, ks.front())) + " with " + std::to_string(differing) +
                " seed-level differences across K = 10/20/30";
  });
}

CriterionResult TrendSuite::noma_vs_oma() {
  return timed(10, "Trend: NOMA vs OMA", [&](CriterionResult& r) {
    const double noma = mean(sim::Scheme::DqnContinuous, 20.0, opts_.base.n_elements);
    const double oma = mean(sim::Scheme::OmaTdma, 20.0, opts_.base.n_elements);
    const double ratio = noma / oma;
    r.pass = noma >= 1.15 * oma;
    r.detail = "NOMA " + fmt("%.3f", noma) + " vs OMA " + fmt("%.3f", oma) + ", gain " + fmt("%+.1f%%", 100.0 * (ratio - 1.0)) +
               " (required >= +15%, paper reports +35%)";
  });
}

CriterionResult TrendSuite::decoding_order() {
  return timed(11, "Trend: decoding order", [&](CriterionResult& r) {
    const auto scheme = sim::Scheme::DqnContinuous;
    const auto& opt = runs(scheme, 20.0, opts_.base.n_elements, "optimal");
    const auto& rnd = runs(scheme, 20.0, opts_.base.n_elements, "random");
    double m_opt = 0.0, m_rnd = 0.0;
    for (const auto& x : opt) m_opt += x.record.sum_rate;
    for (const auto& x : rnd) m_rnd += x.record.sum_rate;
    m_opt /= static_cast<double>(opt.size());
    m_rnd /= static_cast<double>(rnd.size());

    sim::ScenarioConfig cfg = opts_.base;
    cfg.scheme = scheme;
    cfg.power_dbm = 20.0;
    std::size_t checks = 0, dominated = 0;
    SeededRng rng(opts_.base.seed_base);
    for (const auto& run : opt) {
      for (std::size_t t = 0; t < run.detail.slots.size(); ++t) {
        const auto& ctx = run.detail.slots[t];
        const auto& state = run.detail.final_states[t];
        const double best = sim::score_state(cfg, ctx, state).sum_rate;
        for (std::size_t k = 0; k < opts_.order_samples; ++k) {
          sim::SlotContext alt = ctx;
          alt.fixed_order = noma::random_order(ctx.clusters, rng);
          const double s = sim::score_state(cfg, alt, state).sum_rate;
          ++checks;
          if (s > best + 1e-12 * std::max(1.0, best)) ++dominated;
        }
      }
    }
    r.pass = m_opt >= m_rnd && dominated == 0;
    r.detail = "paired means optimal " + fmt("%.3f", m_opt) + " vs random " + fmt("%.3f", m_rnd) + "; " +
               std::to_string(dominated) + " of " + std::to_string(checks) + " sampled permutations beat the exhaustive order";
  });
}

CriterionResult TrendSuite::learning_signal() {
  return timed(12, "DQN learning signal", [&](CriterionResult& r) {
    constexpr std::size_t window = 100;
    auto curve = [&](sim::Scheme s) {
      sim::ScenarioConfig cfg = opts_.learning;
      cfg.scheme = s;
      sim::PipelineDetail d;
      sim::run_pipeline(cfg, opts_.learning_seed, &cache_, &d);
      return d.episode_rewards;
    };
    const auto dqn = curve(sim::Scheme::DqnContinuous);
    const auto tab = curve(sim::Scheme::QLearning);
    const std::size_t n = dqn.size();
    const std::size_t dec = std::max<std::size_t>(1, n / 10);
    const auto ma_dqn = rl::moving_average(dqn, window);
    const auto ma_tab = rl::moving_average(tab, window);
    const double first = mean_of(ma_dqn, 0, dec);
    const double last = mean_of(ma_dqn, n - dec, n);
    // Spread of the final moving average implied by the episode-to-episode noise.
    double var = 0.0;
    const double raw_last = mean_of(dqn, n - dec, n);
    for (std::size_t i = n - dec; i < n; ++i) var += (dqn[i] - raw_last) * (dqn[i] - raw_last);
    const double noise = 2.0 * std::sqrt(var / static_cast<double>(dec)) / std::sqrt(static_cast<double>(std::min(window, n)));
    const double f_dqn = ma_dqn.back(), f_tab = ma_tab.back();
    const bool tab_ok = f_tab <= f_dqn + noise;
    r.pass = last > first && tab_ok;
    r.detail = std::to_string(n) + " episodes, DQN moving average first decile " + fmt("%.3f", first) + " -> final decile " +
               fmt("%.3f", last) + "; final MA DQN " + fmt("%.3f", f_dqn) + " vs Q-learning " + fmt("%.3f", f_tab) +
               (f_tab <= f_dqn ? " (Q-learning not above DQN)"
                               : tab_ok ? " (Q-learning above DQN within noise " + fmt("%.3f", noise) + ", recorded)"
                                        : " (Q-learning above DQN beyond noise " + fmt("%.3f", noise) + ")");
  });
}

TrendOptions acceptance_options() {
  TrendOptions o;
  o.base.seeds = 20;
  o.base.agent.episodes = 40;
  o.base.agent.steps_per_slot = 10;
  return o;
}

std::vector<CriterionResult> run_all(const TrendOptions& opts, const std::vector<int>& only,
                                     const std::function<void(const CriterionResult&)>& report,
                                     const sim::Progress& progress) {
  auto wanted = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };
  std::vector<CriterionResult> out;
  auto add = [&](CriterionResult r) {
    if (report) report(r);
    out.push_back(std::move(r));
  };
  const std::uint64_t seed = 20240101;
  if (wanted(1)) add(zf_correctness(seed));
  if (wanted(2)) add(em_monotonicity(seed + 1));
  if (wanted(3)) add(kmeans_reduction(seed + 2));
  if (wanted(4)) add(proposition1(seed + 3));
  if (wanted(5)) add(gradient_fidelity(seed + 4));
  if (wanted(6)) add(sampler_uniformity(seed + 5));
  TrendSuite suite(opts, progress);
  if (wanted(7)) add(suite.power_trend());
  if (wanted(8)) add(suite.scheme_ordering());
  if (wanted(9)) add(suite.elements_trend());
  if (wanted(10)) add(suite.noma_vs_oma());
  if (wanted(11)) add(suite.decoding_order());
  if (wanted(12)) add(suite.learning_signal());
  if (wanted(13)) add(reward_telescoping(seed + 6));
  return out;
}

std::string format_line(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "%s [%2d] %s (%.1f s): ", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
  return head + r.detail;
}

}  // namespace irsnoma::verify
