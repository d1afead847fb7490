#pragma once
// Majorization surrogates behind the block updates: the quadratic upper
// bound for Hermitian forms, the unit-modulus linear minimizer, the
// matrices of the auxiliary-precoder (Q) subproblem, and the quadratic of
// the reflection-phase (phi) subproblem.

#include "isac/metrics.hpp"
#include "isac/numerics.hpp"
#include "isac/scenario.hpp"

#include <cmath>
#include <memory>

namespace isac {

// phase(0) := 0, so the extracted unit phasor of a zero entry is 1.
inline cxd unit_phase(cxd z) {
  const double mag = std::abs(z);
  return mag == 0.0 ? cxd(1.0, 0.0) : z / mag;
}

// Value of the spectral quadratic majorizer of x^H T x around x_anchor:
// replacing T by the curvature bound s_max I >= T (s_max >= lambda_max(T))
// and keeping the expansion exact at x_anchor gives a global upper bound.
inline double quadratic_majorizer_value(const CMatrix& t, double s_max,
                                        const CVector& x,
                                        const CVector& x_anchor) {
  if (t.rows() != t.cols() || t.rows() != x.size() ||
      x.size() != x_anchor.size())
    throw DimensionError("quadratic_majorizer_value: shape mismatch");
  const double lmax = max_eigenvalue(t);
  if (s_max < lmax - 1e-9)
    throw ContractViolation("quadratic_majorizer_value: s_max below lambda_max");
  const double quad = s_max * x.squaredNorm();
  const double cross =
      2.0 * std::real(cxd(x.adjoint() * (t * x_anchor - s_max * x_anchor)));
  const double anchor =
      std::real(cxd(x_anchor.adjoint() * (s_max * x_anchor - t * x_anchor)));
  return quad + cross + anchor;
}

// argmin over unit-modulus f of -2 Re{f^H k}: element-wise phase alignment.
inline CVector unit_modulus_linear_min(const CVector& k) {
  CVector f(k.size());
  for (Eigen::Index i = 0; i < k.size(); ++i) f(i) = unit_phase(k(i));
  return f;
}

// ---------------------------------------------------------------------------
// Analog (F) subproblem terms.
// ---------------------------------------------------------------------------

struct FUpdateTerms {
  CMatrix g;           // N_RF x N_RF, W W^H
  CMatrix d;           // N_RF x N_t, W (Q + rho Psi)^H; column i drives row i
  double lambda_max_g = 0.0;
};

inline FUpdateTerms build_f_update_terms(const CMatrix& w, const CMatrix& q,
                                         const CMatrix& psi, double rho) {
  if (q.rows() != psi.rows() || q.cols() != psi.cols() ||
      w.cols() != q.cols())
    throw DimensionError("build_f_update_terms: shape mismatch");
  if (!(rho > 0.0))
    throw ContractViolation("build_f_update_terms: rho must be positive");
  FUpdateTerms out;
  out.g = w * w.adjoint();
  out.d = w * (q + rho * psi).adjoint();
  out.lambda_max_g = max_eigenvalue(out.g);
  return out;
}

// The F-dependent part of the AL equals this up to a constant in F:
// (1/2rho) ||FW - (Q + rho Psi)||_F^2.
inline double f_block_exact(const CMatrix& f, const CMatrix& w,
                            const CMatrix& q, const CMatrix& psi, double rho) {
  return (f * w - (q + rho * psi)).squaredNorm() / (2.0 * rho);
}

// Row-wise majorizer of f_block_exact built from the spectral bound; exact
// in the linear term, majorized in the quadratic term.
inline double f_block_surrogate(const CMatrix& f, const CMatrix& f_anchor,
                                const FUpdateTerms& terms, double rho) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    const CVector x = f.row(i).adjoint();
    const CVector xk = f_anchor.row(i).adjoint();
    total += quadratic_majorizer_value(terms.g, terms.lambda_max_g, x, xk);
    total -= 2.0 * std::real(cxd(x.adjoint() * terms.d.col(i)));
  }
  return total / (2.0 * rho);
}

// ---------------------------------------------------------------------------
// Radar geometry shared by every solve on the same (grid, n_tx): steering
// columns, the desired pattern, and the top eigenvalue of the beampattern
// Gram matrix [ |a_k^H a_l|^2 ]_{kl}, which equals the top eigenvalue of the
// (never materialized) N_t^2 x N_t^2 matrix sum_k vec(A_k) vec(A_k)^H.
// ---------------------------------------------------------------------------

struct RadarGeometry {
  CMatrix steering;  // N_t x K
  RVector p_d;       // desired indicator per grid angle
  double sum_pd_sq = 0.0;
  double gram_lambda_max = 0.0;

  static RadarGeometry build(const DesiredBeampattern& desired, int n_tx) {
    RadarGeometry g;
    g.steering = steering_grid(desired.grid, n_tx);
    g.p_d = desired.values;
    g.sum_pd_sq = desired.values.squaredNorm();
    const CMatrix inner = g.steering.adjoint() * g.steering;  // K x K
    const RMatrix gram = inner.cwiseAbs2();
    Eigen::SelfAdjointEigenSolver<RMatrix> es(gram,
                                              Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw NumericalFailure("RadarGeometry: Gram eigensolve failed");
    g.gram_lambda_max = es.eigenvalues().maxCoeff();
    return g;
  }
};

// ---------------------------------------------------------------------------
// Q subproblem surrogate.
// ---------------------------------------------------------------------------

struct QSurrogate {
  CMatrix z1;  // N_t x N_t Hermitian PSD: mu He^H He + C1
  CMatrix z3;  // N_t x M: 2 Z2^H Q^k
  // Intermediates retained for testing.
  CMatrix z2;  // N_t x N_t Hermitian: -mu Hb^H Hb - C2 - B_t
  CMatrix c1;  // unvec(2 C vec(Qk Qk^H))
  CMatrix c2;  // 2 lambda_max(C) Qk Qk^H
  CMatrix b_t; // unvec((w/K) sum_k 2 delta P_d(k) vec(A_k))
  double lambda_c = 0.0;    // lambda_max(C)
  double radar_scale = 0.0; // w/K, the weight in front of the Gram sum
  std::shared_ptr<const RadarGeometry> geometry;

  CMatrix a_k(Eigen::Index k) const {
    const CVector a = geometry->steering.col(k);
    return a * a.adjoint();
  }

  // The full N_t^2 x N_t^2 Gram matrix C; test-only (quartic storage).
  CMatrix c_big() const {
    const Eigen::Index n = geometry->steering.rows();
    const Eigen::Index k_count = geometry->steering.cols();
    CMatrix c = CMatrix::Zero(n * n, n * n);
    for (Eigen::Index k = 0; k < k_count; ++k) {
      const CVector v = vec(a_k(k));
      c.noalias() += v * v.adjoint();
    }
    return radar_scale * c;
  }
};

// sum_k coeff(k) * a_k a_k^H without materializing the A_k list.
inline CMatrix steering_weighted_sum(const CMatrix& steering,
                                     const RVector& coeff) {
  return steering * coeff.asDiagonal() * steering.adjoint();
}

inline QSurrogate build_q_surrogate(
    const BeamformerState& state, const ChannelSet& ch,
    const DesiredBeampattern& desired, const SystemConfig& cfg,
    std::shared_ptr<const RadarGeometry> geometry, double radar_weight) {
  if (!geometry)
    geometry = std::make_shared<RadarGeometry>(
        RadarGeometry::build(desired, cfg.n_tx));
  const Eigen::Index k_count = geometry->steering.cols();
  if (state.q_aux.rows() != geometry->steering.rows())
    throw DimensionError("build_q_surrogate: precoder/steering mismatch");

  QSurrogate s;
  s.geometry = geometry;
  s.radar_scale = radar_weight / static_cast<double>(k_count);
  s.lambda_c = s.radar_scale * geometry->gram_lambda_max;

  const CMatrix qk = state.q_aux;
  const CMatrix qqh = qk * qk.adjoint();
  const RVector p_b = transmit_beampattern_cached(qk, geometry->steering);

  s.c1 = steering_weighted_sum(geometry->steering,
                               (2.0 * s.radar_scale) * p_b);
  s.b_t = steering_weighted_sum(
      geometry->steering,
      (2.0 * s.radar_scale * state.delta) * geometry->p_d);
  s.c2 = 2.0 * s.lambda_c * qqh;

  const EffectiveChannels eff = effective_channels(ch, state.phi);
  s.z1 = cfg.mu * (eff.h_eve_eff.adjoint() * eff.h_eve_eff) + s.c1;
  s.z2 = -cfg.mu * (eff.h_bob_eff.adjoint() * eff.h_bob_eff) - s.c2 - s.b_t;
  s.z3 = 2.0 * s.z2.adjoint() * qk;
  return s;
}

inline QSurrogate build_q_surrogate(const BeamformerState& state,
                                    const ChannelSet& ch,
                                    const DesiredBeampattern& desired,
                                    const SystemConfig& cfg) {
  return build_q_surrogate(state, ch, desired, cfg, nullptr, 1.0 - cfg.mu);
}

// Exact Q-dependent objective terms the surrogate majorizes:
// mu (||He Q||^2 - ||Hb Q||^2) + w * MSE(delta, Q).
inline double q_exact_objective(const CMatrix& q, const ChannelSet& ch,
                                const CVector& phi,
                                const DesiredBeampattern& desired, double mu,
                                double delta, double radar_weight) {
  const EffectiveChannels eff = effective_channels(ch, phi);
  const double comm = (eff.h_eve_eff * q).squaredNorm() -
                      (eff.h_bob_eff * q).squaredNorm();
  return mu * comm + radar_weight * beampattern_mse(delta, q, desired);
}

// Quadratic part of the Q surrogate that the closed-form update minimizes.
inline double q_surrogate_quadratic(const QSurrogate& s, const CMatrix& q) {
  return std::real((q.adjoint() * (s.z1 * q)).trace()) +
         std::real((q.adjoint() * s.z3).trace());
}

// The derivation drops lambda_max(C) ||Q Q^H||_F^2 as if constant; it is
// constant only at fixed Gram norm, so the faithful majorizer keeps it.
inline double q_majorizer_value(const QSurrogate& s, const CMatrix& q) {
  const CMatrix qqh = q * q.adjoint();
  return q_surrogate_quadratic(s, q) + s.lambda_c * qqh.squaredNorm();
}

// ---------------------------------------------------------------------------
// phi subproblem quadratic.
// ---------------------------------------------------------------------------

struct PhiQuadratic {
  CMatrix b_mat;  // H_ie^H H_ie
  CMatrix e_mat;  // H_ai Q Q^H H_ai^H
  CVector j_vec;  // diag(H_ai Q Q^H H_ae^H H_ie)
  CMatrix m_mat;  // H_ib^H H_ib
  CVector o_vec;  // diag(H_ai Q Q^H H_ab^H H_ib)
  CMatrix p_mat;  // B - M

  // The Hadamard-composed matrix that actually multiplies phi.
  CMatrix ph_mat() const { return hadamard(p_mat, e_mat.transpose()); }
};

inline PhiQuadratic build_phi_quadratic(const ChannelSet& ch,
                                        const CMatrix& q) {
  if (ch.h_ai.cols() != q.rows())
    throw DimensionError("build_phi_quadratic: precoder/channel mismatch");
  PhiQuadratic out;
  out.b_mat = ch.h_ie.adjoint() * ch.h_ie;
  out.m_mat = ch.h_ib.adjoint() * ch.h_ib;
  const CMatrix x = ch.h_ai * q;  // N_i x M
  out.e_mat = x * x.adjoint();
  const CMatrix y_e = (ch.h_ae * q).adjoint() * ch.h_ie;  // M x N_i
  const CMatrix y_b = (ch.h_ab * q).adjoint() * ch.h_ib;  // M x N_i
  out.j_vec = x.cwiseProduct(y_e.transpose()).rowwise().sum();
  out.o_vec = x.cwiseProduct(y_b.transpose()).rowwise().sum();
  out.p_mat = out.b_mat - out.m_mat;
  return out;
}

// Exact phi-dependent comm terms: for Phi = diag(phi),
// ||He(Phi) Q||^2 - ||Hb(Phi) Q||^2
//   = phi^H Ph phi + 2 Re{phi^H (j* - o*)} + (||H_ae Q||^2 - ||H_ab Q||^2).
inline double phi_exact_objective(const PhiQuadratic& pq, const CVector& phi) {
  const CMatrix ph = pq.ph_mat();
  const double quad = std::real(cxd(phi.adjoint() * (ph * phi)));
  const double lin = 2.0 * std::real(cxd(
      phi.adjoint() * (pq.j_vec.conjugate() - pq.o_vec.conjugate())));
  return quad + lin;
}

// Alignment target of the phi update: maximize Re{phi^H t} over unit-modulus
// phi, with t = (lambda_max(Ph) I - Ph) phi_anchor + (o* - j*).
inline CVector phi_linear_target(const PhiQuadratic& pq,
                                 const CVector& phi_anchor) {
  const CMatrix ph = pq.ph_mat();
  if (ph.rows() != phi_anchor.size())
    throw DimensionError("phi_linear_target: anchor length mismatch");
  const double lmax = max_eigenvalue(ph);
  return (lmax * phi_anchor - ph * phi_anchor) +
         (pq.o_vec.conjugate() - pq.j_vec.conjugate());
}

}  // namespace isac
