#include "irsnoma/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "irsnoma/error.hpp"

namespace irsnoma::clustering {

namespace {

double squared_distance(const FeatureVector& a, const FeatureVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

double log_sum_exp(const std::vector<double>& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

// log(Psi_m) + log p(x | kappa_m) for every component.
std::vector<double> weighted_log_densities(const FeatureVector& x, const GmmParams& p) {
  std::vector<double> out(p.size());
  for (std::size_t m = 0; m < p.size(); ++m) {
    out[m] = p.weights[m] > 0.0 ? std::log(p.weights[m]) + log_gmm_density(x, p.means[m], p.variances[m])
                                : -std::numeric_limits<double>::infinity();
  }
  return out;
}

void check_features(const CsiSet& csi) {
  if (csi.size() == 0) throw InvalidArgument("clustering: no users");
  for (const auto& f : csi.features) {
    if (f.size() != csi.dim()) throw DimensionMismatch("clustering: features differ in dimension");
  }
}

}  // namespace

CsiSet normalize_channels(const std::vector<ComplexVector>& raw) {
  CsiSet out;
  for (std::size_t l = 0; l < raw.size(); ++l) {
    const double n = norm(raw[l]);
    if (!(n > 0.0)) throw InvalidArgument("normalize_channels: zero channel for user " + std::to_string(l));
    ComplexVector h = raw[l];
    cdouble rot{1.0, 0.0};
    for (const auto& z : h) {
      if (std::abs(z) > 1e-9 * n) {
        rot = std::conj(z) / std::abs(z);
        break;
      }
    }
    FeatureVector f(2 * h.size());
    for (std::size_t k = 0; k < h.size(); ++k) {
      h[k] = h[k] * rot / n;
      f[k] = h[k].real();
      f[h.size() + k] = h[k].imag();
    }
    out.features.push_back(std::move(f));
    out.raw_channels.push_back(raw[l]);
    out.normalized.push_back(std::move(h));
  }
  return out;
}

CsiSet position_features(const std::vector<ComplexVector>& raw, const std::vector<channel::Position>& positions) {
  if (raw.size() != positions.size()) throw DimensionMismatch("position_features: channel and position counts differ");
  CsiSet out = normalize_channels(raw);
  for (std::size_t l = 0; l < positions.size(); ++l) out.features[l] = {positions[l].x, positions[l].y};
  return out;
}

ComplexVector feature_to_channel(const FeatureVector& f) {
  if (f.size() % 2 != 0) throw DimensionMismatch("feature_to_channel: odd feature length");
  const std::size_t k = f.size() / 2;
  ComplexVector h(k);
  for (std::size_t i = 0; i < k; ++i) h[i] = {f[i], f[k + i]};
  return h;
}

void ClusterThresholds::validate() const {
  if (!(rho1 >= 0.0) || !(rho2 >= 0.0)) throw InvalidArgument("cluster thresholds must be non-negative");
}

double gain_difference(const CsiSet& csi, std::size_t a, std::size_t b) {
  return std::abs(norm(csi.raw_channels.at(a)) - norm(csi.raw_channels.at(b)));
}

double correlation(const CsiSet& csi, std::size_t a, std::size_t b) {
  const auto& ha = csi.raw_channels.at(a);
  const auto& hb = csi.raw_channels.at(b);
  if (ha.size() != hb.size()) throw DimensionMismatch("correlation: channel lengths differ");
  cdouble inner{0.0, 0.0};
  for (std::size_t i = 0; i < ha.size(); ++i) inner += std::conj(ha[i]) * hb[i];
  return std::min(1.0, std::abs(inner) / (norm(ha) * norm(hb)));
}

KmeansResult kmeans_seed(const CsiSet& csi, std::size_t m, SeededRng& rng) {
  check_features(csi);
  const std::size_t l = csi.size();
  if (m == 0 || m > l) throw InvalidArgument("kmeans_seed: need 1 <= m <= L");
  std::vector<std::size_t> pick(l);
  std::iota(pick.begin(), pick.end(), 0);
  for (std::size_t i = 0; i < m; ++i) std::swap(pick[i], pick[i + rng.uniform_index(l - i)]);

  KmeansResult out;
  for (std::size_t i = 0; i < m; ++i) out.centers.push_back(csi.features[pick[i]]);
  out.assignment.assign(l, std::numeric_limits<std::size_t>::max());
  for (std::size_t it = 0; it < 100; ++it) {
    bool changed = false;
    for (std::size_t u = 0; u < l; ++u) {
      std::size_t best = 0;
      double best_d = squared_distance(csi.features[u], out.centers[0]);
      for (std::size_t c = 1; c < m; ++c) {
        const double d = squared_distance(csi.features[u], out.centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (out.assignment[u] != best) {
        out.assignment[u] = best;
        changed = true;
      }
    }
    out.iterations = it + 1;
    if (!changed) break;
    for (std::size_t c = 0; c < m; ++c) {
      FeatureVector sum(csi.dim(), 0.0);
      std::size_t count = 0;
      for (std::size_t u = 0; u < l; ++u) {
        if (out.assignment[u] != c) continue;
        for (std::size_t d = 0; d < sum.size(); ++d) sum[d] += csi.features[u][d];
        ++count;
      }
      if (count == 0) continue;  // an emptied center stays where it was
      for (auto& s : sum) s /= static_cast<double>(count);
      out.centers[c] = std::move(sum);
    }
  }
  return out;
}

void GmmParams::validate() const {
  if (weights.empty() || means.size() != weights.size() || variances.size() != weights.size()) {
    throw InvalidArgument("GmmParams: inconsistent component counts");
  }
  double s = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidArgument("GmmParams: negative weight");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-12) throw InvalidArgument("GmmParams: weights do not sum to 1");
  for (double v : variances) {
    if (!(v > 0.0)) throw InvalidArgument("GmmParams: variance must be positive");
  }
}

double log_gmm_density(const FeatureVector& x, const FeatureVector& mu, double sigma2) {
  if (!(sigma2 > 0.0)) throw InvalidArgument("gmm_density: sigma2 must be positive");
  if (x.size() != mu.size()) throw DimensionMismatch("gmm_density: x and mu differ in dimension");
  const double d = static_cast<double>(x.size());
  return -0.5 * d * std::log(2.0 * std::numbers::pi * sigma2) - squared_distance(x, mu) / (2.0 * sigma2);
}

double gmm_density(const FeatureVector& x, const FeatureVector& mu, double sigma2) {
  return std::exp(log_gmm_density(x, mu, sigma2));
}

double log_likelihood(const CsiSet& csi, const GmmParams& params) {
  check_features(csi);
  params.validate();
  double ll = 0.0;
  for (const auto& x : csi.features) ll += log_sum_exp(weighted_log_densities(x, params));
  return ll;
}

Responsibilities e_step(const CsiSet& csi, const GmmParams& params, std::size_t* degenerate_rows) {
  check_features(csi);
  params.validate();
  Responsibilities out;
  const std::size_t m = params.size();
  for (const auto& x : csi.features) {
    const auto lw = weighted_log_densities(x, params);
    const double lse = log_sum_exp(lw);
    std::vector<double> row(m);
    if (!std::isfinite(lse)) {
      std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(m));
      if (degenerate_rows) ++*degenerate_rows;
    } else {
      double s = 0.0;
      for (std::size_t c = 0; c < m; ++c) s += row[c] = std::exp(lw[c] - lse);
      for (auto& v : row) v /= s;
    }
    out.r.push_back(std::move(row));
  }
  return out;
}

GmmParams m_step(const CsiSet& csi, const Responsibilities& resp) {
  check_features(csi);
  const std::size_t l = csi.size();
  const std::size_t m = resp.components();
  if (resp.users() != l || m == 0) throw DimensionMismatch("m_step: responsibilities do not match the data");
  const double d = static_cast<double>(csi.dim());

  GmmParams p;
  std::vector<std::size_t> empty;
  for (std::size_t c = 0; c < m; ++c) {
    double nk = 0.0;
    FeatureVector mu(csi.dim(), 0.0);
    for (std::size_t u = 0; u < l; ++u) {
      nk += resp.r[u][c];
      for (std::size_t k = 0; k < mu.size(); ++k) mu[k] += resp.r[u][c] * csi.features[u][k];
    }
    double var = kVarianceFloor;
    if (nk > 0.0) {
      for (auto& v : mu) v /= nk;
      double ss = 0.0;
      for (std::size_t u = 0; u < l; ++u) ss += resp.r[u][c] * squared_distance(csi.features[u], mu);
      var = std::max(kVarianceFloor, ss / (d * nk));
    } else {
      empty.push_back(c);
    }
    p.weights.push_back(nk / static_cast<double>(l));
    p.means.push_back(std::move(mu));
    p.variances.push_back(var);
  }
  if (!empty.empty()) {
    if (empty.size() == m) throw NumericalError("m_step: every component is empty");
    double mean_var = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      if (std::find(empty.begin(), empty.end(), c) == empty.end()) mean_var += p.variances[c];
    }
    mean_var /= static_cast<double>(m - empty.size());
    for (std::size_t c : empty) {
      GmmParams live;
      for (std::size_t j = 0; j < m; ++j) {
        if (p.weights[j] > 0.0) {
          live.weights.push_back(p.weights[j]);
          live.means.push_back(p.means[j]);
          live.variances.push_back(p.variances[j]);
        }
      }
      std::size_t worst = 0;
      double worst_ll = std::numeric_limits<double>::infinity();
      for (std::size_t u = 0; u < l; ++u) {
        const double v = log_sum_exp(weighted_log_densities(csi.features[u], live));
        if (v < worst_ll) {
          worst_ll = v;
          worst = u;
        }
      }
      p.means[c] = csi.features[worst];
      p.variances[c] = mean_var;
      p.weights[c] = 1.0 / static_cast<double>(l);
    }
  }
  const double total = std::accumulate(p.weights.begin(), p.weights.end(), 0.0);
  for (auto& w : p.weights) w /= total;
  return p;
}

namespace {

double kappa_distance(const GmmParams& a, const GmmParams& b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    s += (a.weights[c] - b.weights[c]) * (a.weights[c] - b.weights[c]);
    s += (a.variances[c] - b.variances[c]) * (a.variances[c] - b.variances[c]);
    s += squared_distance(a.means[c], b.means[c]);
  }
  return std::sqrt(s);
}

}  // namespace

KgmmFit fit_kgmm(const CsiSet& csi, std::size_t m, double eps_tilde, SeededRng& rng, std::size_t max_iterations) {
  if (!(eps_tilde > 0.0)) throw InvalidArgument("fit_kgmm: eps_tilde must be positive");
  const KmeansResult km = kmeans_seed(csi, m, rng);
  const std::size_t l = csi.size();
  const double d = static_cast<double>(csi.dim());

  KgmmFit fit;
  GmmParams& p = fit.params;
  double pooled_ss = 0.0;
  for (std::size_t u = 0; u < l; ++u) pooled_ss += squared_distance(csi.features[u], km.centers[km.assignment[u]]);
  const double pooled = std::max(kVarianceFloor, pooled_ss / (d * static_cast<double>(l)));
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t count = 0;
    double ss = 0.0;
    for (std::size_t u = 0; u < l; ++u) {
      if (km.assignment[u] != c) continue;
      ++count;
      ss += squared_distance(csi.features[u], km.centers[c]);
    }
    p.weights.push_back(static_cast<double>(count) / static_cast<double>(l));
    p.means.push_back(km.centers[c]);
    // Singletons and empty clusters carry no spread of their own.
    p.variances.push_back(count > 1 ? std::max(kVarianceFloor, ss / (d * static_cast<double>(count))) : pooled);
  }
  // An empty K-means cluster gets a small weight so EM can still use it.
  for (auto& w : p.weights) w = std::max(w, 1.0 / (10.0 * static_cast<double>(l)));
  const double total = std::accumulate(p.weights.begin(), p.weights.end(), 0.0);
  for (auto& w : p.weights) w /= total;

  fit.log_likelihoods.push_back(log_likelihood(csi, p));
  for (std::size_t it = 0; it < max_iterations; ++it) {
    fit.resp = e_step(csi, p);
    GmmParams next = m_step(csi, fit.resp);
    const double delta = kappa_distance(next, p);
    p = std::move(next);
    fit.log_likelihoods.push_back(log_likelihood(csi, p));
    fit.iterations = it + 1;
    if (delta < eps_tilde) {
      fit.converged = true;
      break;
    }
  }
  fit.resp = e_step(csi, p);
  return fit;
}

ClusterAssignment assign_users(const Responsibilities& resp, const GmmParams& params, std::size_t capacity) {
  const std::size_t l = resp.users();
  const std::size_t m = resp.components();
  if (l == 0 || m == 0 || params.size() != m) throw DimensionMismatch("assign_users: responsibilities vs params");
  if (capacity == 0) throw InvalidArgument("assign_users: capacity must be positive");
  if (l > capacity * m) {
    throw CapacityInfeasible("assign_users: " + std::to_string(l) + " users exceed " + std::to_string(m) +
                             " clusters of " + std::to_string(capacity));
  }
  std::vector<std::size_t> a(l);
  for (std::size_t u = 0; u < l; ++u) {
    a[u] = static_cast<std::size_t>(std::max_element(resp.r[u].begin(), resp.r[u].end()) - resp.r[u].begin());
  }
  auto sizes = [&] {
    std::vector<std::size_t> s(m, 0);
    for (std::size_t c : a) ++s[c];
    return s;
  };
  for (;;) {
    const auto s = sizes();
    const auto over = std::find_if(s.begin(), s.end(), [&](std::size_t n) { return n > capacity; });
    if (over == s.end()) break;
    const std::size_t c = static_cast<std::size_t>(over - s.begin());
    std::size_t move_user = l, move_to = m;
    double best_margin = std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < l; ++u) {
      if (a[u] != c) continue;
      for (std::size_t t = 0; t < m; ++t) {
        if (t == c || s[t] >= capacity) continue;
        const double margin = resp.r[u][c] - resp.r[u][t];
        if (margin < best_margin) {
          best_margin = margin;
          move_user = u;
          move_to = t;
        }
      }
    }
    a[move_user] = move_to;
  }

  ClusterAssignment out;
  out.capacity = capacity;
  std::vector<std::size_t> remap(m, m);
  for (std::size_t c = 0; c < m; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t u = 0; u < l; ++u) {
      if (a[u] == c) members.push_back(u);
    }
    if (members.empty()) continue;
    remap[c] = out.members.size();
    out.members.push_back(std::move(members));
    out.centers.push_back(params.means[c]);
    out.component.push_back(c);
  }
  for (std::size_t u = 0; u < l; ++u) {
    out.assignment.push_back(remap[a[u]]);
    out.resp_max.push_back(resp.r[u][a[u]]);
  }
  return out;
}

ThresholdReport threshold_report(const CsiSet& csi, const ClusterAssignment& a, const ClusterThresholds& t) {
  t.validate();
  ThresholdReport r;
  for (const auto& members : a.members) {
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        ++r.pairs;
        if (gain_difference(csi, members[i], members[j]) < t.rho1 && correlation(csi, members[i], members[j]) > t.rho2) {
          ++r.satisfied;
        }
      }
    }
  }
  r.fraction = r.pairs == 0 ? 1.0 : static_cast<double>(r.satisfied) / static_cast<double>(r.pairs);
  return r;
}

}  // namespace irsnoma::clustering
