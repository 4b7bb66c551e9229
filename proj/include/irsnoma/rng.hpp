#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace irsnoma {

// Seeded xoshiro256** generator with its own uniform/normal conversions so
// the sample stream depends only on the seed, never on the standard
// library's distribution implementations.
//
// Sub-streams: derive(label) returns an independent generator whose seed is
// splitmix64(seed ^ fnv1a64(label)). Derivation depends only on the parent
// seed and the label, not on how many samples the parent has produced, so
// modules can be re-run in any order. Labels used by the simulator look like
// "channels/slot1" or "agent".
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  // Unbiased integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  // Standard normal via Box-Muller; the second variate is cached.
  double normal();

  SeededRng derive(std::string_view label) const;

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

}  // namespace irsnoma
