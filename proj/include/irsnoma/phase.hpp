#pragma once

#include <optional>
#include <vector>

#include "irsnoma/numerics.hpp"

namespace irsnoma {

// IRS phase configuration: one angle per element in [0, 2*pi). When
// resolution_bits is set every angle lies on the grid 2*pi*n / 2^bits.
struct PhaseShiftVector {
  std::vector<double> thetas;
  std::optional<unsigned> resolution_bits;

  std::size_t size() const { return thetas.size(); }

  static PhaseShiftVector zeros(std::size_t k) { return {std::vector<double>(k, 0.0), std::nullopt}; }

  // Throws InvalidArgument when an angle is outside [0, 2*pi) or off-grid.
  void validate() const;

  // upsilon^H = [e^{j theta_1}, ..., e^{j theta_K}], the row that multiplies Phi.
  ComplexVector reflection_row() const;
};

// Wraps any real angle into [0, 2*pi).
double wrap_phase(double theta);

}  // namespace irsnoma
