#include "irsnoma/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "irsnoma/error.hpp"

namespace irsnoma::mobility {

void Region::validate() const {
  if (!(x_min < x_max) || !(y_min < y_max)) throw InvalidArgument("region: empty extent");
  if (density_fn_id != "uniform" && density_fn_id != "center_peaked") {
    throw InvalidArgument("region: unknown density '" + density_fn_id + "'");
  }
}

bool Region::contains(const Position& p) const {
  return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
}

double Region::density(const Position& p) const {
  if (!contains(p)) return 0.0;
  if (density_fn_id == "uniform") return 1.0;
  // Separable raised sine peaking at the centre, 0.25 at the corners.
  const Position n = normalize(p);
  const double fx = 0.5 + 0.5 * std::sin(std::numbers::pi * n.x);
  const double fy = 0.5 + 0.5 * std::sin(std::numbers::pi * n.y);
  return fx * fy;
}

double Region::density_sup() const { return 1.0; }

Position Region::clamp(const Position& p) const {
  return {std::clamp(p.x, x_min, x_max), std::clamp(p.y, y_min, y_max)};
}

Position Region::normalize(const Position& p) const {
  return {(p.x - x_min) / (x_max - x_min), (p.y - y_min) / (y_max - y_min)};
}

Position Region::denormalize(const Position& p) const {
  return {x_min + p.x * (x_max - x_min), y_min + p.y * (y_max - y_min)};
}

AcceptRejectSampler AcceptRejectSampler::for_region(const Region& region, std::uint64_t seed) {
  return {region, region.density_sup(), SeededRng(seed)};
}

std::vector<Position> sample_initial_positions(AcceptRejectSampler& sampler, std::size_t l, SampleAudit* audit) {
  if (l == 0) throw InvalidArgument("sample_initial_positions: l must be >= 1");
  sampler.region.validate();
  if (!(sampler.envelope > 0.0)) throw InvalidArgument("sample_initial_positions: envelope must be positive");
  constexpr std::size_t budget = 1'000'000;
  const Region& r = sampler.region;
  std::vector<Position> out;
  out.reserve(l);
  std::size_t proposals = 0;
  while (out.size() < l) {
    if (proposals >= budget && static_cast<double>(out.size()) < 1e-3 * static_cast<double>(proposals)) {
      throw NumericalError("sample_initial_positions: acceptance rate below 1e-3");
    }
    const Position x{sampler.rng.uniform(r.x_min, r.x_max), sampler.rng.uniform(r.y_min, r.y_max)};
    const double u = sampler.rng.uniform();
    const double m = r.density(x);
    if (m > sampler.envelope * (1.0 + 1e-12)) throw InvalidArgument("sample_initial_positions: density exceeds envelope");
    const bool accept = u * sampler.envelope <= m;
    ++proposals;
    if (audit) audit->accepted.push_back(accept);
    if (accept) out.push_back(x);
  }
  if (audit) audit->proposals += proposals;
  return out;
}

namespace {

double reflect(double v, double lo, double hi) {
  const double width = hi - lo;
  double t = std::fmod(v - lo, 2.0 * width);
  if (t < 0.0) t += 2.0 * width;
  return t <= width ? lo + t : hi - (t - width);
}

}  // namespace

std::vector<Trajectory> simulate_true_motion(const std::vector<Position>& start, const Region& region, std::size_t s,
                                             double step_std, SeededRng& rng) {
  region.validate();
  if (!(step_std >= 0.0)) throw InvalidArgument("simulate_true_motion: step_std must be non-negative");
  std::vector<Trajectory> out;
  out.reserve(start.size());
  for (std::size_t u = 0; u < start.size(); ++u) {
    if (!region.contains(start[u])) throw InvalidArgument("simulate_true_motion: start outside region");
    Trajectory t{u, {start[u]}};
    t.positions.reserve(s + 1);
    out.push_back(std::move(t));
  }
  // Slot-major draws so a user's path does not depend on s.
  for (std::size_t step = 0; step < s; ++step) {
    for (auto& t : out) {
      const Position p = t.positions.back();
      const double dx = step_std * rng.normal();
      const double dy = step_std * rng.normal();
      t.positions.push_back({reflect(p.x + dx, region.x_min, region.x_max), reflect(p.y + dy, region.y_min, region.y_max)});
    }
  }
  return out;
}

}  // namespace irsnoma::mobility
