#include "irsnoma/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "irsnoma/error.hpp"

namespace irsnoma::channel {

double distance(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

void NetworkLayout::validate() const {
  if (user_positions.empty()) throw InvalidArgument("layout: at least one user required");
  if (n_antennas == 0 || n_elements == 0) throw InvalidArgument("layout: N and K must be >= 1");
  for (const auto& p : user_positions) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InvalidArgument("layout: non-finite user position");
  }
}

void PathLossParams::validate() const {
  if (!(c_ref > 0.0)) throw InvalidArgument("path loss: c_ref must be positive");
  if (alpha_bu < 2.0 || alpha_iu < 2.0 || alpha_bi < 2.0) {
    throw InvalidArgument("path loss: exponents must be >= 2");
  }
}

double path_loss(double d, double c_ref, double alpha) {
  if (!(d > 0.0)) throw InvalidArgument("path_loss: distance must be positive");
  return c_ref * std::pow(d, -alpha);
}

ComplexVector ula_response(std::size_t n, double angle) {
  ComplexVector a(n);
  const double s = std::sin(angle);
  for (std::size_t i = 0; i < n; ++i) a[i] = std::polar(1.0, std::numbers::pi * static_cast<double>(i) * s);
  return a;
}

double direction_angle(const Position& from, const Position& to) {
  return std::atan2(to.y - from.y, to.x - from.x);
}

ComplexMatrix sample_rician(SeededRng& rng, std::size_t rows, std::size_t cols, double k_factor,
                            const ComplexMatrix& los) {
  if (los.rows() != rows || los.cols() != cols) throw DimensionMismatch("sample_rician: LoS shape");
  if (!(k_factor >= 0.0)) throw InvalidArgument("sample_rician: negative K-factor");
  for (const auto& z : los.entries()) {
    if (std::abs(std::abs(z) - 1.0) > 1e-9) throw InvalidArgument("sample_rician: LoS must be unit modulus");
  }
  const double w_los = std::sqrt(k_factor / (1.0 + k_factor));
  const double w_nlos = std::sqrt(1.0 / (1.0 + k_factor));
  const ComplexVector scatter = sample_standard_complex_gaussian(rng, rows * cols);
  std::vector<cdouble> out(rows * cols);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w_los * los.entries()[i] + w_nlos * scatter[i];
  return ComplexMatrix(rows, cols, std::move(out));
}

ChannelRealization generate_channels(const NetworkLayout& layout, const PathLossParams& pl,
                                     const RicianParams& rp, const DirectLinkParams& direct,
                                     const SeededRng& rng) {
  layout.validate();
  pl.validate();
  const std::size_t k = layout.n_elements;
  const std::size_t n = layout.n_antennas;

  ChannelRealization out;
  {
    const double d = distance(layout.bs_position, layout.irs_position);
    const ComplexVector arrival = ula_response(k, direction_angle(layout.irs_position, layout.bs_position));
    const ComplexVector departure = ula_response(n, direction_angle(layout.bs_position, layout.irs_position));
    ComplexMatrix los(k, n);
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t c = 0; c < n; ++c) los(r, c) = arrival[r] * std::conj(departure[c]);
    }
    SeededRng sub = rng.derive("bs_irs");
    ComplexMatrix g = sample_rician(sub, k, n, rp.k_factor_bi, los);
    const double amp = std::sqrt(path_loss(d, pl.c_ref, pl.alpha_bi));
    std::vector<cdouble> scaled(g.entries());
    for (auto& z : scaled) z *= amp;
    out.g = ComplexMatrix(k, n, std::move(scaled));
  }

  const double blockage = std::pow(10.0, -direct.blockage_loss_db / 10.0);
  for (std::size_t l = 0; l < layout.user_positions.size(); ++l) {
    const Position& user = layout.user_positions[l];
    const double d_iu = distance(layout.irs_position, user);
    if (!(d_iu > 0.0)) throw InvalidArgument("generate_channels: user " + std::to_string(l) + " co-located with IRS");
    const ComplexVector los = ula_response(k, direction_angle(layout.irs_position, user));
    SeededRng sub = rng.derive("irs_user/" + std::to_string(l));
    ComplexMatrix h = sample_rician(sub, k, 1, rp.k_factor_iu, ComplexMatrix(k, 1, los));
    const double amp = std::sqrt(path_loss(d_iu, pl.c_ref, pl.alpha_iu));
    ComplexVector hv = h.entries();
    for (auto& z : hv) z *= amp;
    out.h_users.push_back(std::move(hv));

    if (direct.enabled) {
      const double d_bu = distance(layout.bs_position, user);
      SeededRng dsub = rng.derive("bs_user/" + std::to_string(l));
      ComplexVector dv = sample_standard_complex_gaussian(dsub, n);
      const double damp = std::sqrt(path_loss(d_bu, pl.c_ref, pl.alpha_bu) * blockage);
      for (auto& z : dv) z *= damp;
      out.direct.push_back(std::move(dv));
    }
  }
  return out;
}

ComplexMatrix cascade_matrix(const ComplexVector& h, const ComplexMatrix& g) {
  if (h.size() != g.rows()) throw DimensionMismatch("cascade_matrix: h has " + std::to_string(h.size()) + " entries");
  ComplexMatrix phi(g.rows(), g.cols());
  for (std::size_t k = 0; k < g.rows(); ++k) {
    const cdouble hk = std::conj(h[k]);
    for (std::size_t c = 0; c < g.cols(); ++c) phi(k, c) = hk * g(k, c);
  }
  return phi;
}

ComplexVector effective_channel(const ComplexVector& h, const PhaseShiftVector& theta,
                                const ComplexMatrix& g) {
  if (h.size() != g.rows() || theta.size() != g.rows()) {
    throw DimensionMismatch("effective_channel: h, theta and G disagree on K");
  }
  ComplexMatrix h_row(1, h.size());
  for (std::size_t k = 0; k < h.size(); ++k) h_row(0, k) = std::conj(h[k]);
  const ComplexMatrix theta_m = ComplexMatrix::diagonal(theta.reflection_row());
  return mat_mul(mat_mul(h_row, theta_m), g).row(0);
}

ComplexVector effective_channel_factored(const PhaseShiftVector& theta, const ComplexMatrix& phi) {
  if (theta.size() != phi.rows()) throw DimensionMismatch("effective_channel_factored: theta vs Phi");
  return row_times(theta.reflection_row(), phi);
}

}  // namespace irsnoma::channel
