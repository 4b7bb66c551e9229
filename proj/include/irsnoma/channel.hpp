#pragma once

#include <cstddef>
#include <vector>

#include "irsnoma/numerics.hpp"
#include "irsnoma/phase.hpp"
#include "irsnoma/rng.hpp"

namespace irsnoma::channel {

struct Position {
  double x = 0.0;  // m
  double y = 0.0;  // m

  friend bool operator==(const Position&, const Position&) = default;
};

double distance(const Position& a, const Position& b);

struct NetworkLayout {
  Position bs_position{50.0, 0.0};
  Position irs_position{0.0, 0.0};
  std::vector<Position> user_positions;
  std::size_t n_antennas = 10;  // N
  std::size_t n_elements = 10;  // K

  void validate() const;
};

struct PathLossParams {
  double c_ref = 1e-3;  // -30 dB at 1 m
  double alpha_bu = 3.5;
  double alpha_iu = 2.8;
  double alpha_bi = 2.2;

  void validate() const;
};

struct RicianParams {
  double k_factor_bi = 10.0;
  double k_factor_iu = 3.0;
};

// The BS-user link is blocked by default. When enabled it is Rayleigh
// (no LoS survives the obstruction) with an extra penetration loss.
struct DirectLinkParams {
  bool enabled = false;
  double blockage_loss_db = 40.0;
};

struct ChannelRealization {
  ComplexMatrix g;                    // K x N, BS -> IRS
  std::vector<ComplexVector> h_users; // L vectors of K entries, IRS -> user
  std::vector<ComplexVector> direct;  // L vectors of N entries, BS -> user; empty when blocked

  std::size_t n_users() const { return h_users.size(); }
};

// C * d^-alpha. Throws InvalidArgument for d <= 0.
double path_loss(double d, double c_ref, double alpha);

// Half-wavelength ULA response toward `angle` (radians from the array normal).
ComplexVector ula_response(std::size_t n, double angle);

// Direction angle of `to` as seen from `from`, measured from the +x axis.
double direction_angle(const Position& from, const Position& to);

// sqrt(k/(1+k)) * los + sqrt(1/(1+k)) * W with W ~ CN(0, 1) i.i.d.
ComplexMatrix sample_rician(SeededRng& rng, std::size_t rows, std::size_t cols, double k_factor,
                            const ComplexMatrix& los);

// Draws one realization. Sub-streams: "bs_irs", "irs_user/<l>" and
// "bs_user/<l>" are derived from `rng`, so the direct link never depends on K
// and user l's channel never depends on the other users.
ChannelRealization generate_channels(const NetworkLayout& layout, const PathLossParams& pl,
                                     const RicianParams& rp, const DirectLinkParams& direct,
                                     const SeededRng& rng);

// Phi = diag(h^H) G, so that h^H Theta G = upsilon^H Phi.
ComplexMatrix cascade_matrix(const ComplexVector& h, const ComplexMatrix& g);

// h^H Theta G evaluated literally as a matrix product (1 x N).
ComplexVector effective_channel(const ComplexVector& h, const PhaseShiftVector& theta,
                                const ComplexMatrix& g);

// upsilon^H Phi, the factored form used in the inner optimisation loops.
ComplexVector effective_channel_factored(const PhaseShiftVector& theta, const ComplexMatrix& phi);

}  // namespace irsnoma::channel
