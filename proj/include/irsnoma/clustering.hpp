#pragma once

#include <cstddef>
#include <vector>

#include "irsnoma/channel.hpp"
#include "irsnoma/numerics.hpp"
#include "irsnoma/rng.hpp"

namespace irsnoma::clustering {

using FeatureVector = std::vector<double>;

struct CsiSet {
  std::vector<FeatureVector> features;
  std::vector<ComplexVector> raw_channels;
  std::vector<ComplexVector> normalized;  // unit norm, first significant entry real and positive

  std::size_t size() const { return features.size(); }
  std::size_t dim() const { return features.empty() ? 0 : features.front().size(); }
};

// h / ||h||, rotated so its first entry above 1e-9 in magnitude is real and
// positive. Features are [Re h~, Im h~] (dimension 2K). Throws
// InvalidArgument on a zero channel.
CsiSet normalize_channels(const std::vector<ComplexVector>& raw);

// Same channels, but the features are 2-D positions.
CsiSet position_features(const std::vector<ComplexVector>& raw, const std::vector<channel::Position>& positions);

// Inverse of the channel feature layout.
ComplexVector feature_to_channel(const FeatureVector& f);

struct ClusterThresholds {
  double rho1 = 0.5;  // gain difference must stay below
  double rho2 = 0.7;  // correlation must exceed

  void validate() const;
};

// | ||h_a|| - ||h_b|| | on the raw channels.
double gain_difference(const CsiSet& csi, std::size_t a, std::size_t b);
// |h_a^H h_b| / (||h_a|| ||h_b||), in [0, 1].
double correlation(const CsiSet& csi, std::size_t a, std::size_t b);

struct KmeansResult {
  std::vector<FeatureVector> centers;
  std::vector<std::size_t> assignment;
  std::size_t iterations = 0;
};

// m distinct users as initial centers, then Lloyd iterations until the
// assignment is stable or 100 iterations. Ties go to the lower center index.
KmeansResult kmeans_seed(const CsiSet& csi, std::size_t m, SeededRng& rng);

struct GmmParams {
  std::vector<double> weights;             // Psi
  std::vector<FeatureVector> means;        // mu
  std::vector<double> variances;           // isotropic sigma^2

  std::size_t size() const { return weights.size(); }
  void validate() const;
};

inline constexpr double kVarianceFloor = 1e-8;

double log_gmm_density(const FeatureVector& x, const FeatureVector& mu, double sigma2);
double gmm_density(const FeatureVector& x, const FeatureVector& mu, double sigma2);

// Natural log, evaluated with log-sum-exp.
double log_likelihood(const CsiSet& csi, const GmmParams& params);

struct Responsibilities {
  std::vector<std::vector<double>> r;  // L x M

  std::size_t users() const { return r.size(); }
  std::size_t components() const { return r.empty() ? 0 : r.front().size(); }
};

// A row whose every component has zero weighted density is set uniform and
// counted in *degenerate_rows.
Responsibilities e_step(const CsiSet& csi, const GmmParams& params, std::size_t* degenerate_rows = nullptr);

// Weighted means, weights and pooled isotropic variances. A component with zero
// total responsibility is re-seeded at the worst-fit point.
GmmParams m_step(const CsiSet& csi, const Responsibilities& resp);

struct KgmmFit {
  GmmParams params;
  Responsibilities resp;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> log_likelihoods;  // after initialisation and after every EM pair
};

// EM from K-means centers until ||kappa_new - kappa_old|| < eps_tilde or
// max_iterations, in which case converged is false and the last iterate is returned.
KgmmFit fit_kgmm(const CsiSet& csi, std::size_t m, double eps_tilde, SeededRng& rng,
                 std::size_t max_iterations = 500);

struct ClusterAssignment {
  std::vector<std::size_t> assignment;            // user -> cluster
  std::vector<std::vector<std::size_t>> members;  // cluster -> users, ascending
  std::vector<FeatureVector> centers;
  std::vector<std::size_t> component;             // mixture component behind each cluster
  std::vector<double> resp_max;                   // responsibility of the chosen cluster
  std::size_t capacity = 3;

  std::size_t count() const { return members.size(); }
};

// MAP assignment, then users with the smallest responsibility margin leave
// over-full clusters for their best cluster with room. Empty clusters are
// dropped. Throws CapacityInfeasible when L > capacity * M.
ClusterAssignment assign_users(const Responsibilities& resp, const GmmParams& params, std::size_t capacity = 3);

struct ThresholdReport {
  std::size_t pairs = 0;
  std::size_t satisfied = 0;
  double fraction = 1.0;  // satisfied / pairs, 1 when there are no pairs
};

// Intra-cluster pairs meeting both the gain-difference and correlation tests.
ThresholdReport threshold_report(const CsiSet& csi, const ClusterAssignment& a, const ClusterThresholds& t);

}  // namespace irsnoma::clustering
