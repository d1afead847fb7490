#pragma once
// Evaluation quantities: effective channels through the reflecting surface,
// secrecy gap/rate, transmit beampattern, beampattern MSE, and the
// augmented-Lagrangian value the solver descends.

#include "isac/numerics.hpp"
#include "isac/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace isac {

struct BeamformerState {
  double delta = 0.0;  // radar beampattern scaling
  CMatrix f_analog;    // N_t x N_RF, unit-modulus entries
  CMatrix w_digital;   // N_RF x M
  CMatrix q_aux;       // N_t x M auxiliary precoder (Q)
  CVector phi;         // N_i reflection phases, unit-modulus
  CMatrix psi_dual;    // N_t x M dual matrix
  double rho = 0.1;    // penalty parameter

  void validate(const SystemConfig& cfg) const {
    if (f_analog.rows() != cfg.n_tx || f_analog.cols() != cfg.n_rf ||
        w_digital.rows() != cfg.n_rf || w_digital.cols() != cfg.n_streams ||
        q_aux.rows() != cfg.n_tx || q_aux.cols() != cfg.n_streams ||
        psi_dual.rows() != cfg.n_tx || psi_dual.cols() != cfg.n_streams ||
        phi.size() != cfg.n_irs)
      throw DimensionError("BeamformerState: shape mismatch with config");
    if (!(rho > 0.0)) throw ContractViolation("BeamformerState: rho <= 0");
    // Zeroed entries are allowed only for the sub-connected projection; the
    // unit-modulus check therefore skips exact zeros.
    for (Eigen::Index j = 0; j < f_analog.cols(); ++j)
      for (Eigen::Index i = 0; i < f_analog.rows(); ++i) {
        const double mag = std::abs(f_analog(i, j));
        if (mag != 0.0 && std::abs(mag - 1.0) > 1e-12)
          throw ContractViolation("BeamformerState: analog entry off modulus");
      }
    for (Eigen::Index i = 0; i < phi.size(); ++i)
      if (std::abs(std::abs(phi(i)) - 1.0) > 1e-12)
        throw ContractViolation("BeamformerState: phase entry off modulus");
    if (q_aux.squaredNorm() > cfg.p_max + 1e-9)
      throw ContractViolation("BeamformerState: power budget exceeded");
  }
};

struct EffectiveChannels {
  CMatrix h_bob_eff;  // N_b x N_t
  CMatrix h_eve_eff;  // N_e x N_t
};

inline EffectiveChannels effective_channels(const ChannelSet& ch,
                                            const CVector& phi) {
  if (ch.h_ai.rows() != phi.size() || ch.h_ib.cols() != phi.size() ||
      ch.h_ie.cols() != phi.size() || ch.h_ab.cols() != ch.h_ai.cols() ||
      ch.h_ae.cols() != ch.h_ai.cols())
    throw DimensionError("effective_channels: shape mismatch");
  const CMatrix reflected = phi.asDiagonal() * ch.h_ai;  // N_i x N_t
  return {ch.h_ab + ch.h_ib * reflected, ch.h_ae + ch.h_ie * reflected};
}

// Received signal powers through the effective channels with unit noise.
inline double snr_bob(const ChannelSet& ch, const BeamformerState& s) {
  const CMatrix heff =
      ch.h_ab + ch.h_ib * (s.phi.asDiagonal() * ch.h_ai);
  return (heff * (s.f_analog * s.w_digital)).squaredNorm();
}

inline double snr_eve(const ChannelSet& ch, const BeamformerState& s) {
  const CMatrix heff =
      ch.h_ae + ch.h_ie * (s.phi.asDiagonal() * ch.h_ai);
  return (heff * (s.f_analog * s.w_digital)).squaredNorm();
}

inline double secrecy_gap(const ChannelSet& ch, const BeamformerState& s) {
  return std::max(0.0, snr_bob(ch, s) - snr_eve(ch, s));
}

inline double secrecy_rate_from_snrs(double snr_b, double snr_e) {
  return std::max(0.0, std::log2(1.0 + snr_b) - std::log2(1.0 + snr_e));
}

inline double secrecy_rate(const ChannelSet& ch, const BeamformerState& s) {
  return secrecy_rate_from_snrs(snr_bob(ch, s), snr_eve(ch, s));
}

// Steering vectors for a whole grid, one column per angle.
inline CMatrix steering_grid(const std::vector<double>& angle_grid, int n_tx) {
  CMatrix a(n_tx, static_cast<Eigen::Index>(angle_grid.size()));
  for (size_t k = 0; k < angle_grid.size(); ++k)
    a.col(static_cast<Eigen::Index>(k)) = steering_vector(angle_grid[k], n_tx);
  return a;
}

// P_b(theta_k) = a(theta_k)^H X X^H a(theta_k) for each grid angle, where X
// is the combined precoder: FW for reporting, Q inside the penalty solver.
inline RVector transmit_beampattern_cached(const CMatrix& x,
                                           const CMatrix& steering_cols) {
  if (steering_cols.rows() != x.rows())
    throw DimensionError("transmit_beampattern: steering/precoder mismatch");
  return (steering_cols.adjoint() * x).rowwise().squaredNorm();
}

inline RVector transmit_beampattern(const CMatrix& x,
                                    const std::vector<double>& angle_grid) {
  return transmit_beampattern_cached(
      x, steering_grid(angle_grid, static_cast<int>(x.rows())));
}

enum class BeamformMatrix { fw, q };

inline RVector transmit_beampattern(const BeamformerState& s,
                                    const std::vector<double>& angle_grid,
                                    BeamformMatrix which = BeamformMatrix::fw) {
  const CMatrix x = which == BeamformMatrix::fw
                        ? CMatrix(s.f_analog * s.w_digital)
                        : s.q_aux;
  return transmit_beampattern(x, angle_grid);
}

// (1/K) sum_k |delta * P_d(theta_k) - P_b(theta_k)|^2
inline double beampattern_mse_from_pattern(double delta, const RVector& p_b,
                                           const DesiredBeampattern& desired) {
  if (p_b.size() != desired.values.size())
    throw DimensionError("beampattern_mse: grid mismatch");
  const RVector diff = delta * desired.values - p_b;
  return diff.squaredNorm() / static_cast<double>(p_b.size());
}

inline double beampattern_mse(double delta, const CMatrix& x,
                              const DesiredBeampattern& desired) {
  return beampattern_mse_from_pattern(
      delta, transmit_beampattern(x, desired.grid), desired);
}

// Augmented Lagrangian. The radar term enters with weight radar_weight;
// the fixed-weight mode uses (1 - mu), the escalating mode scales that by
// its penalty multiplier.
inline double al_value_weighted(const BeamformerState& s, const ChannelSet& ch,
                                const DesiredBeampattern& desired,
                                const SystemConfig& cfg, double radar_weight) {
  const EffectiveChannels eff = effective_channels(ch, s.phi);
  const double comm = (eff.h_eve_eff * s.q_aux).squaredNorm() -
                      (eff.h_bob_eff * s.q_aux).squaredNorm();
  const double mse = beampattern_mse(s.delta, s.q_aux, desired);
  const CMatrix resid = s.q_aux - s.f_analog * s.w_digital;
  const double dual = std::real((s.psi_dual.adjoint() * resid).trace());
  const double prox = resid.squaredNorm() / (2.0 * s.rho);
  return cfg.mu * comm + radar_weight * mse + dual + prox;
}

inline double al_value(const BeamformerState& s, const ChannelSet& ch,
                       const DesiredBeampattern& desired,
                       const SystemConfig& cfg) {
  return al_value_weighted(s, ch, desired, cfg, 1.0 - cfg.mu);
}

}  // namespace isac
