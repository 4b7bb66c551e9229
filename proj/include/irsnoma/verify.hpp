#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "irsnoma/config.hpp"
#include "irsnoma/sim.hpp"

namespace irsnoma::verify {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// Property checks on random instances; each is self-contained and fast.
CriterionResult zf_correctness(std::uint64_t seed, std::size_t instances = 500);
CriterionResult em_monotonicity(std::uint64_t seed, std::size_t datasets = 100);
CriterionResult kmeans_reduction(std::uint64_t seed, std::size_t datasets = 100);
CriterionResult proposition1(std::uint64_t seed, std::size_t instances = 1000);
CriterionResult gradient_fidelity(std::uint64_t seed);
CriterionResult sampler_uniformity(std::uint64_t seed, std::size_t samples = 100000);
CriterionResult reward_telescoping(std::uint64_t seed, std::size_t traces = 1000);

struct TrendOptions {
  sim::ScenarioConfig base;         // scenario for the sweeps; agent budget included
  sim::ScenarioConfig learning;     // scenario for the learning-signal check
  std::uint64_t learning_seed = 1;
  std::size_t order_samples = 50;   // random permutations checked per slot
};

// Scenario-level trends. Runs are memoised, so criteria that share a sweep
// point (e.g. P = 20 dBm) pay for it once.
class TrendSuite {
 public:
  explicit TrendSuite(TrendOptions opts, sim::Progress progress = {});

  CriterionResult power_trend();
  CriterionResult scheme_ordering();
  CriterionResult elements_trend();
  CriterionResult noma_vs_oma();
  CriterionResult decoding_order();
  CriterionResult learning_signal();

 private:
  struct Run {
    sim::MetricsRecord record;
    sim::PipelineDetail detail;  // trace and mobility dropped
  };
  const std::vector<Run>& runs(sim::Scheme scheme, double power_dbm, std::size_t elements,
                               const std::string& order = "optimal");
  double mean(sim::Scheme scheme, double power_dbm, std::size_t elements);

  TrendOptions opts_;
  sim::Progress progress_;
  sim::MobilityCache cache_;
  std::map<std::string, std::vector<Run>> memo_;
};

// Acceptance budget: trend sweeps use a reduced agent budget so the whole
// suite finishes in minutes on one core.
TrendOptions acceptance_options();

// Runs the selected criteria (all when `only` is empty) and reports each
// result as soon as it is known.
std::vector<CriterionResult> run_all(const TrendOptions& opts, const std::vector<int>& only,
                                     const std::function<void(const CriterionResult&)>& report,
                                     const sim::Progress& progress = {});

std::string format_line(const CriterionResult& r);

}  // namespace irsnoma::verify
