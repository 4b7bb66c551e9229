#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "irsnoma/channel.hpp"
#include "irsnoma/rng.hpp"

namespace irsnoma::mobility {

using channel::Position;

// Movement range of all users and the (unnormalised) density M(x) over it.
struct Region {
  double x_min = 20.0;
  double x_max = 40.0;
  double y_min = 20.0;
  double y_max = 40.0;
  std::string density_fn_id = "uniform";  // "uniform" or "center_peaked"

  void validate() const;
  bool contains(const Position& p) const;
  double density(const Position& p) const;
  double density_sup() const;
  Position clamp(const Position& p) const;
  // Maps the region onto [0, 1]^2 and back.
  Position normalize(const Position& p) const;
  Position denormalize(const Position& p) const;
};

struct Trajectory {
  std::size_t user_id = 0;
  std::vector<Position> positions;  // index = slot
};

struct AcceptRejectSampler {
  Region region;
  double envelope = 1.0;  // Z, must dominate the density
  SeededRng rng;

  static AcceptRejectSampler for_region(const Region& region, std::uint64_t seed);
};

struct SampleAudit {
  std::size_t proposals = 0;
  std::vector<bool> accepted;  // indicator per proposal
};

// Proposals uniform over the region; accepted when u * Z <= M(x).
// Throws NumericalError when fewer than one in 1000 of 1e6 proposals pass.
std::vector<Position> sample_initial_positions(AcceptRejectSampler& sampler, std::size_t l,
                                               SampleAudit* audit = nullptr);

// Reflected Gaussian random walk; trajectories hold s + 1 positions.
std::vector<Trajectory> simulate_true_motion(const std::vector<Position>& start, const Region& region,
                                             std::size_t s, double step_std, SeededRng& rng);

}  // namespace irsnoma::mobility
