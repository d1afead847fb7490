#pragma once
// The optimization engine: closed-form block updates (delta, F, W, Q, phi),
// the block-descent inner loop on the augmented Lagrangian, the outer
// dual/penalty loop driving ||Q - FW|| to zero, and the escalating-penalty
// wrapper that retightens the radar term until its residual is small.

#include "isac/metrics.hpp"
#include "isac/numerics.hpp"
#include "isac/scenario.hpp"
#include "isac/surrogates.hpp"

#include <chrono>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace isac {

// ---------------------------------------------------------------------------
// Options and bookkeeping types.
// ---------------------------------------------------------------------------

struct SolverOptions {
  bool skip_delta = false;   // hold delta fixed (pure-communication runs)
  bool skip_analog = false;  // hold F fixed (fully digital architectures)
  bool skip_phi = false;     // hold phi fixed (no reflecting surface)
  bool subconnected = false; // block-diagonal analog network
  // Starting analog network overriding the random draw (used with
  // skip_analog to model a fully digital front end).
  std::optional<CMatrix> fixed_analog;
};

struct InnerIterationRecord {
  int outer_idx = 0;
  int inner_idx = 0;
  // AL value entering the cycle, then after each block update in order.
  double al_entry = 0.0;
  double al_after_delta = 0.0;
  double al_after_analog = 0.0;
  double al_after_digital = 0.0;
  double al_after_q = 0.0;
  double al_after_phi = 0.0;
  double al_value = 0.0;   // value at the end of the cycle
  double violation = 0.0;  // ||Q - FW||_inf at the end of the cycle
  double rho = 0.0;        // penalty parameter in effect during the cycle
  double kappa = 0.0;      // dual-update threshold in effect
  bool dual_updated = false;  // decision of the enclosing outer iteration
  // Feasibility diagnostics at the end of the cycle. Modulus errors measure
  // the distance to the allowed entry set (unit circle, or exact zero in the
  // block-diagonal architecture).
  double analog_modulus_err = 0.0;
  double phi_modulus_err = 0.0;
  double q_power = 0.0;           // ||Q||_F^2
  bool q_power_clipped = false;   // the kept q solve hit the power cap
};

struct OuterIterationRecord {
  int outer_idx = 0;
  double violation = 0.0;  // ||Q - FW||_inf after the inner solve
  double rho = 0.0;        // value in effect during this outer iteration
  double kappa = 0.0;      // threshold used for the dual/penalty decision
  double eps_inner = 0.0;  // inner tolerance used by this iteration
  bool dual_updated = false;
  int inner_iterations = 0;
};

struct PenaltyRoundRecord {
  int round_idx = 0;
  double radar_penalty = 0.0;  // pattern MSE of the implementable FW
  double multiplier = 1.0;     // radar-weight multiplier used this round
};

struct SolverTrace {
  std::vector<InnerIterationRecord> inner;
  std::vector<OuterIterationRecord> outer;
  std::vector<PenaltyRoundRecord> penalty_rounds;
  std::vector<std::string> warnings;
  bool digital_regularized = false;  // any regularized W solve occurred
};

struct SolveMetrics {
  double secrecy_gap = 0.0;
  double secrecy_rate = 0.0;
  double beampattern_mse = 0.0;  // FW-form, with the final delta
  int iterations_inner_total = 0;
  int iterations_outer = 0;
  int penalty_rounds = 0;
  double wall_time_sec = 0.0;
};

struct SolveReport {
  BeamformerState state;
  SolverTrace trace;
  SolveMetrics metrics;
  bool converged = true;          // final ||Q - FW||_inf <= eps_stop
  bool penalty_target_met = true; // escalating mode reached its residual target
};

// ---------------------------------------------------------------------------
// Block updates.
// ---------------------------------------------------------------------------

// Least-squares fit of the pattern scale: argmin_delta sum_k (delta P_d - P_b)^2.
inline double update_delta(const CMatrix& q, const RadarGeometry& geometry) {
  const double denom = geometry.sum_pd_sq;
  if (denom == 0.0)
    throw ContractViolation(
        "update_delta: all-zero desired pattern (division by zero)");
  const RVector p_b = transmit_beampattern_cached(q, geometry.steering);
  return geometry.p_d.dot(p_b) / denom;
}

inline double update_delta(const CMatrix& q,
                           const DesiredBeampattern& desired) {
  const double denom = desired.values.squaredNorm();
  if (denom == 0.0)
    throw ContractViolation(
        "update_delta: all-zero desired pattern (division by zero)");
  const RVector p_b = transmit_beampattern(q, desired.grid);
  return desired.values.dot(p_b) / denom;
}

// Unit-modulus analog update: each row i aligns to
// t_i = (lambda_max(G) I - G) f_i^H + d_i, giving F(i,j) = conj(t_i(j))/|.|.
inline CMatrix update_analog(const CMatrix& f_anchor, const CMatrix& w,
                             const CMatrix& q, const CMatrix& psi,
                             double rho) {
  if (f_anchor.cols() != w.rows() || f_anchor.rows() != q.rows())
    throw DimensionError("update_analog: shape mismatch");
  const FUpdateTerms terms = build_f_update_terms(w, q, psi, rho);
  const Eigen::Index n_rf = f_anchor.cols();
  const CMatrix t =
      (terms.lambda_max_g * CMatrix::Identity(n_rf, n_rf) - terms.g) *
          f_anchor.adjoint() +
      terms.d;  // column i is t_i
  CMatrix f(f_anchor.rows(), f_anchor.cols());
  for (Eigen::Index j = 0; j < f.cols(); ++j)
    for (Eigen::Index i = 0; i < f.rows(); ++i)
      f(i, j) = unit_phase(std::conj(t(j, i)));
  return f;
}

struct DigitalUpdate {
  CMatrix w;
  bool regularized = false;
};

// Least-squares digital update: W = (F^H F)^{-1} F^H (rho Psi + Q), with a
// ridge fallback when F^H F is numerically singular.
inline DigitalUpdate update_digital(const CMatrix& f, const CMatrix& q,
                                    const CMatrix& psi, double rho) {
  if (f.rows() != q.rows() || q.rows() != psi.rows() ||
      q.cols() != psi.cols())
    throw DimensionError("update_digital: shape mismatch");
  if (!(rho > 0.0))
    throw ContractViolation("update_digital: rho must be positive");
  CMatrix gram = f.adjoint() * f;
  const HermitianEig eig = hermitian_eig(gram);
  const double lmin = eig.eigenvalues(0);
  const double lmax = eig.eigenvalues(eig.eigenvalues.size() - 1);
  DigitalUpdate out;
  out.regularized = !(lmin > 0.0) || lmax / lmin > 1e12;
  if (out.regularized) {
    const double ridge =
        1e-10 * gram.trace().real() / static_cast<double>(f.cols());
    gram += ridge * CMatrix::Identity(f.cols(), f.cols());
  }
  out.w = gram.ldlt().solve(f.adjoint() * (rho * psi + q));
  return out;
}

struct QUpdate {
  CMatrix q;
  double alpha = 0.0;  // power-constraint multiplier (0 when inactive)
  int bisection_iterations = 0;
};

namespace detail {

// Power-constrained ridge solve in a fixed eigenbasis: minimizes a convex
// quadratic whose stationarity condition reads
//   (2 rho Z1 + (shift + 2 rho alpha) I) Q = rhs,  ||Q||^2 <= p_max,
// with eig the spectrum of 2 rho Z1. alpha is found by bisection on
// ||Q(alpha)||^2 = p_max when the unconstrained solution is infeasible; the
// bisection keeps its feasible endpoint, so ||Q||^2 never exceeds p_max.
inline QUpdate q_power_solve(const HermitianEig& eig, const CMatrix& rhs,
                             double shift, double rho, double p_max) {
  const CMatrix v = eig.eigenvectors.adjoint() * rhs;
  const RVector dnn = v.rowwise().squaredNorm();
  const RVector& pi = eig.eigenvalues;

  auto power_at = [&](double alpha) {
    double total = 0.0;
    for (Eigen::Index n = 0; n < pi.size(); ++n) {
      const double den = pi(n) + 2.0 * rho * alpha + shift;
      total += dnn(n) / (den * den);
    }
    return total;
  };
  auto assemble = [&](double alpha) {
    CMatrix scaled = v;
    for (Eigen::Index n = 0; n < pi.size(); ++n)
      scaled.row(n) /= pi(n) + 2.0 * rho * alpha + shift;
    return CMatrix(eig.eigenvectors * scaled);
  };

  QUpdate out;
  if (power_at(0.0) <= p_max) {
    out.q = assemble(0.0);
    return out;
  }
  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (power_at(hi) > p_max) {
    hi *= 2.0;
    if (++doublings > 60)
      throw NumericalFailure("update_q: power bisection bracket not found");
  }
  int iters = 0;
  while (p_max - power_at(hi) > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    if (power_at(mid) > p_max)
      lo = mid;
    else
      hi = mid;
    if (++iters > 500)
      throw NumericalFailure("update_q: power bisection did not converge");
  }
  out.alpha = hi;
  out.bisection_iterations = iters;
  out.q = assemble(hi);
  return out;
}

}  // namespace detail

// Power-constrained quadratic minimizer: solves
//   (2 rho Z1 + (2 rho alpha + 1) I) Q = FW - rho Z3 - rho Psi
// through the eigenbasis of 2 rho Z1, with alpha found by bisection on
// ||Q(alpha)||^2 = P_max when the unconstrained solution is infeasible.
inline QUpdate update_q_with_surrogate(const BeamformerState& state,
                                       const QSurrogate& qs, double p_max) {
  const double rho = state.rho;
  const CMatrix rhs = state.f_analog * state.w_digital - rho * qs.z3 -
                      rho * state.psi_dual;
  const HermitianEig eig = hermitian_eig(CMatrix(2.0 * rho * qs.z1));
  return detail::q_power_solve(eig, rhs, 1.0, rho, p_max);
}

inline QUpdate update_q(const BeamformerState& state, const ChannelSet& ch,
                        const DesiredBeampattern& desired,
                        const SystemConfig& cfg,
                        std::shared_ptr<const RadarGeometry> geometry = nullptr,
                        std::optional<double> radar_weight = std::nullopt) {
  const QSurrogate qs =
      build_q_surrogate(state, ch, desired, cfg, std::move(geometry),
                        radar_weight.value_or(1.0 - cfg.mu));
  return update_q_with_surrogate(state, qs, cfg.p_max);
}

// Reflection-phase update: align to the surrogate's linear target.
inline CVector update_phi(const BeamformerState& state, const ChannelSet& ch) {
  const PhiQuadratic pq = build_phi_quadratic(ch, state.q_aux);
  return unit_modulus_linear_min(phi_linear_target(pq, state.phi));
}

// Zeroes every analog entry outside the block-diagonal pattern in which RF
// chain j drives antennas j*(N_t/N_rf) .. (j+1)*(N_t/N_rf)-1.
inline CMatrix project_subconnected(const CMatrix& f, int n_rf) {
  if (f.cols() != n_rf)
    throw DimensionError("project_subconnected: column count mismatch");
  const Eigen::Index n_tx = f.rows();
  if (n_rf < 1 || n_tx % n_rf != 0)
    throw ContractViolation("project_subconnected: n_tx not divisible by n_rf");
  const Eigen::Index block = n_tx / n_rf;
  CMatrix out = CMatrix::Zero(n_tx, n_rf);
  for (Eigen::Index j = 0; j < n_rf; ++j)
    out.block(j * block, j, block, 1) = f.block(j * block, j, block, 1);
  return out;
}

// ---------------------------------------------------------------------------
// Augmented Lagrangian with cached steering (hot-loop form of al_value).
// ---------------------------------------------------------------------------

inline double al_value_cached(const BeamformerState& s, const ChannelSet& ch,
                              const RadarGeometry& geometry, double mu,
                              double radar_weight) {
  const EffectiveChannels eff = effective_channels(ch, s.phi);
  const double comm = (eff.h_eve_eff * s.q_aux).squaredNorm() -
                      (eff.h_bob_eff * s.q_aux).squaredNorm();
  const RVector p_b = transmit_beampattern_cached(s.q_aux, geometry.steering);
  const double mse = (s.delta * geometry.p_d - p_b).squaredNorm() /
                     static_cast<double>(geometry.p_d.size());
  const CMatrix gap = s.q_aux - s.f_analog * s.w_digital;
  const double dual = (s.psi_dual.adjoint() * gap).trace().real();
  return mu * comm + radar_weight * mse + dual +
         gap.squaredNorm() / (2.0 * s.rho);
}

// ---------------------------------------------------------------------------
// Inner loop: block cycle delta -> F -> W -> Q -> phi until the relative AL
// change falls below eps_inner (or the iteration cap).
// ---------------------------------------------------------------------------

struct InnerResult {
  int iterations = 0;
  double final_al = 0.0;
};

inline InnerResult bsum_inner(BeamformerState& state, const ChannelSet& ch,
                              const DesiredBeampattern& desired,
                              const SystemConfig& cfg,
                              const SolverOptions& opts, double radar_weight,
                              const std::shared_ptr<const RadarGeometry>& geometry,
                              double eps_inner, int outer_idx, double kappa_now,
                              SolverTrace& trace) {
  auto al_now = [&] {
    return al_value_cached(state, ch, *geometry, cfg.mu, radar_weight);
  };
  InnerResult result;
  double al_prev = al_now();
  // Warm-started damping for the safeguarded q step; see below.
  double q_damping = 1.0;
  // Multiplier of the q solve whose result is currently held in state.q_aux;
  // zero covers the initial point, which is feasible by construction.
  double q_alpha = 0.0;
  const auto modulus_err = [](const auto& m) {
    const auto a = m.cwiseAbs().array();
    return ((a - 1.0).abs().min(a)).maxCoeff();
  };
  for (int it = 0; it < cfg.hyper.max_inner_iters; ++it) {
    InnerIterationRecord rec;
    rec.outer_idx = outer_idx;
    rec.inner_idx = it;
    rec.rho = state.rho;
    rec.kappa = kappa_now;
    rec.al_entry = al_prev;

    if (!opts.skip_delta) state.delta = update_delta(state.q_aux, *geometry);
    rec.al_after_delta = al_now();

    if (!opts.skip_analog) {
      state.f_analog = update_analog(state.f_analog, state.w_digital,
                                     state.q_aux, state.psi_dual, state.rho);
      if (opts.subconnected)
        state.f_analog = project_subconnected(state.f_analog, cfg.n_rf);
    }
    rec.al_after_analog = al_now();

    const DigitalUpdate du =
        update_digital(state.f_analog, state.q_aux, state.psi_dual, state.rho);
    state.w_digital = du.w;
    if (du.regularized && !trace.digital_regularized) {
      trace.digital_regularized = true;
      trace.warnings.emplace_back(
          "digital update regularized: F^H F condition number above 1e12");
    }
    rec.al_after_digital = al_now();

    // The q block iterates its majorization step until the block stalls:
    // the closed form minimizes only the quadratic part of the majorizer,
    // so a single application can overshoot (the dropped quartic remainder
    // pushes the Lagrangian up) or stop far from the block optimum. Each
    // pass rebuilds the surrogate at the current point, tries the plain
    // closed form, and on ascent re-solves with the quartic replaced by its
    // tangent plus a proximal term at the anchor; the same eigenbasis
    // applies with the identity shift raised by rho*damping, and once the
    // damping clears the quartic's curvature on the power ball the solve is
    // a true majorization step, so the growth loop always terminates. The
    // damping is warm-started across passes and cycles.
    double al_q = rec.al_after_digital;
    const double rho = state.rho;
    for (int refine = 0; refine < 50; ++refine) {
      const QSurrogate qs =
          build_q_surrogate(state, ch, desired, cfg, geometry, radar_weight);
      const CMatrix q_anchor = state.q_aux;
      const CMatrix rhs0 = state.f_analog * state.w_digital - rho * qs.z3 -
                           rho * state.psi_dual;
      const HermitianEig qeig = hermitian_eig(CMatrix(2.0 * rho * qs.z1));
      const double al_block_prev = al_q;
      const double q_descent_bar =
          al_block_prev + 1e-12 * std::abs(al_block_prev);
      QUpdate qu = detail::q_power_solve(qeig, rhs0, 1.0, rho, cfg.p_max);
      state.q_aux = qu.q;
      al_q = al_now();
      if (al_q > q_descent_bar) {
        const CMatrix quartic_grad =
            4.0 * qs.lambda_c * (q_anchor * q_anchor.adjoint()) * q_anchor;
        double damping = q_damping;
        bool accepted = false;
        for (int attempt = 0; attempt < 60; ++attempt, damping *= 4.0) {
          const CMatrix rhs =
              rhs0 + rho * damping * q_anchor - rho * quartic_grad;
          qu = detail::q_power_solve(qeig, rhs, 1.0 + rho * damping, rho,
                                     cfg.p_max);
          state.q_aux = qu.q;
          al_q = al_now();
          if (al_q <= q_descent_bar) {
            accepted = true;
            break;
          }
        }
        if (accepted) {
          q_damping = std::max(0.25 * damping, 1e-3);
        } else {
          // The anchor kept below was produced by an earlier kept solve, so
          // q_alpha still describes it.
          state.q_aux = q_anchor;
          al_q = al_block_prev;
          break;
        }
      }
      q_alpha = qu.alpha;
      const double block_gain = al_block_prev - al_q;
      if (block_gain <= 0.05 * eps_inner * std::max(std::abs(al_q), 1e-12))
        break;
    }
    rec.al_after_q = al_q;

    if (!opts.skip_phi) state.phi = update_phi(state, ch);
    rec.al_after_phi = al_now();

    rec.al_value = rec.al_after_phi;
    rec.violation =
        linf_norm(state.q_aux - state.f_analog * state.w_digital);
    rec.analog_modulus_err = modulus_err(state.f_analog);
    rec.phi_modulus_err = modulus_err(state.phi);
    rec.q_power = state.q_aux.squaredNorm();
    rec.q_power_clipped = q_alpha > 0.0;
    trace.inner.push_back(rec);
    ++result.iterations;

    const double change = std::abs(al_prev - rec.al_value) /
                          std::max(std::abs(al_prev), 1e-12);
    al_prev = rec.al_value;
    if (change <= eps_inner) break;
  }
  result.final_al = al_prev;
  return result;
}

inline InnerResult bsum_inner(BeamformerState& state, const ChannelSet& ch,
                              const DesiredBeampattern& desired,
                              const SystemConfig& cfg, SolverTrace& trace) {
  const auto geometry = std::make_shared<const RadarGeometry>(
      RadarGeometry::build(desired, cfg.n_tx));
  return bsum_inner(state, ch, desired, cfg, SolverOptions{}, 1.0 - cfg.mu,
                    geometry, cfg.hyper.eps_inner, 0, cfg.hyper.kappa0, trace);
}

// ---------------------------------------------------------------------------
// Outer loop: dual ascent when the equality violation clears the threshold,
// penalty tightening otherwise; both thresholds track the observed error.
// ---------------------------------------------------------------------------

inline SolveReport pdd_outer(
    BeamformerState state, const ChannelSet& ch,
    const DesiredBeampattern& desired, const SystemConfig& cfg,
    const SolverOptions& opts = {},
    std::optional<double> radar_weight_opt = std::nullopt,
    std::shared_ptr<const RadarGeometry> geometry = nullptr) {
  const auto start = std::chrono::steady_clock::now();
  if (!geometry)
    geometry = std::make_shared<const RadarGeometry>(
        RadarGeometry::build(desired, cfg.n_tx));
  const double radar_weight = radar_weight_opt.value_or(1.0 - cfg.mu);

  SolveReport report;
  double kappa = cfg.hyper.kappa0;
  double eps_inner = cfg.hyper.eps_inner;
  double error = std::numeric_limits<double>::infinity();
  bool converged = false;
  int outer = 0;
  for (; outer < cfg.hyper.max_outer_iters && !converged; ++outer) {
    const std::size_t first_inner = report.trace.inner.size();
    const double rho_in_effect = state.rho;
    const InnerResult inner =
        bsum_inner(state, ch, desired, cfg, opts, radar_weight, geometry,
                   eps_inner, outer, kappa, report.trace);
    // Re-sync the digital stage to the cycle's final auxiliary precoder:
    // the block cycle ends after Q and phi move, so W is one least-squares
    // fit behind. Measuring the violation (and reporting the state) on the
    // re-synced pair keeps the returned F*W the actual fit of the returned
    // Q. One more exact block minimization, so the Lagrangian cannot rise.
    const DigitalUpdate resync = update_digital(state.f_analog, state.q_aux,
                                                state.psi_dual, state.rho);
    state.w_digital = resync.w;
    if (resync.regularized && !report.trace.digital_regularized) {
      report.trace.digital_regularized = true;
      report.trace.warnings.emplace_back(
          "digital update regularized: F^H F condition number above 1e12");
    }
    const CMatrix gap = state.q_aux - state.f_analog * state.w_digital;
    error = linf_norm(gap);
    converged = error <= cfg.hyper.eps_stop;

    // On the converged pass the multipliers stay untouched: the returned
    // state is the minimizer of the Lagrangian it was solved against, and a
    // trailing dual step would only perturb its stationarity to set up an
    // iteration that never runs.
    const bool dual_updated = !converged && error <= kappa;
    if (dual_updated)
      state.psi_dual += (1.0 / state.rho) * gap;
    else if (!converged)
      state.rho *= cfg.hyper.c_shrink;
    for (std::size_t r = first_inner; r < report.trace.inner.size(); ++r)
      report.trace.inner[r].dual_updated = dual_updated;

    OuterIterationRecord orec;
    orec.outer_idx = outer;
    orec.violation = error;
    orec.rho = rho_in_effect;
    orec.kappa = kappa;
    orec.eps_inner = eps_inner;
    orec.dual_updated = dual_updated;
    orec.inner_iterations = inner.iterations;
    report.trace.outer.push_back(orec);

    kappa = std::max(0.9 * error, cfg.hyper.eps_stop);
    // The inner tolerance only ever tightens; without the min() an early
    // large violation would loosen it and leave the inner solves sloppy.
    eps_inner =
        std::min(eps_inner, std::max(0.9 * error, cfg.hyper.eps_stop));
  }
  if (!converged)
    report.trace.warnings.emplace_back(
        "outer loop reached max_outer_iters with violation " +
        std::to_string(error));

  state.validate(cfg);
  report.converged = converged;
  report.state = std::move(state);

  const CMatrix fw = report.state.f_analog * report.state.w_digital;
  report.metrics.secrecy_gap = secrecy_gap(ch, report.state);
  report.metrics.secrecy_rate = secrecy_rate(ch, report.state);
  report.metrics.beampattern_mse = beampattern_mse_from_pattern(
      report.state.delta, transmit_beampattern_cached(fw, geometry->steering),
      desired);
  report.metrics.iterations_inner_total =
      static_cast<int>(report.trace.inner.size());
  report.metrics.iterations_outer = outer;
  report.metrics.penalty_rounds = 1;
  report.metrics.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

// ---------------------------------------------------------------------------
// Initialization: random analog phases, all-ones reflection, digital fit to
// a power-normalized random precoder, Q = FW clipped to the power budget.
// ---------------------------------------------------------------------------

inline BeamformerState init_state(const ChannelSet& ch,
                                  const DesiredBeampattern& desired,
                                  const SystemConfig& cfg, std::uint64_t seed,
                                  const SolverOptions& opts = {}) {
  (void)ch;  // channels do not enter the starting point
  cfg.validate();
  BeamformerState s;

  if (opts.fixed_analog) {
    if (opts.fixed_analog->rows() != cfg.n_tx ||
        opts.fixed_analog->cols() != cfg.n_rf)
      throw DimensionError("init_state: fixed analog matrix shape mismatch");
    s.f_analog = *opts.fixed_analog;
  } else {
    std::mt19937_64 rng_f = substream(seed, stream_tag::init_analog);
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    s.f_analog.resize(cfg.n_tx, cfg.n_rf);
    for (Eigen::Index j = 0; j < s.f_analog.cols(); ++j)
      for (Eigen::Index i = 0; i < s.f_analog.rows(); ++i)
        s.f_analog(i, j) = std::polar(1.0, u(rng_f));
  }
  if (opts.subconnected)
    s.f_analog = project_subconnected(s.f_analog, cfg.n_rf);

  s.phi = CVector::Ones(cfg.n_irs);
  s.psi_dual = CMatrix::Zero(cfg.n_tx, cfg.n_streams);
  s.rho = cfg.hyper.rho0;

  std::mt19937_64 rng_q = substream(seed, stream_tag::init_precoder);
  CMatrix q0 = complex_gaussian(rng_q, cfg.n_tx, cfg.n_streams);
  q0 *= std::sqrt(cfg.p_max) / q0.norm();
  s.w_digital = update_digital(s.f_analog, q0, s.psi_dual, s.rho).w;

  const CMatrix fw = s.f_analog * s.w_digital;
  const double power = fw.squaredNorm();
  s.q_aux = power > cfg.p_max ? CMatrix(fw * std::sqrt(cfg.p_max / power)) : fw;

  s.delta = opts.skip_delta ? 1.0 : update_delta(s.q_aux, desired);
  return s;
}

// ---------------------------------------------------------------------------
// Escalating-penalty wrapper. fixed_weight mode is a single outer solve at
// the configured trade-off weight; escalating mode repeats the solve with a
// geometrically growing radar multiplier until the implementable pattern
// residual P_r(delta, FW) reaches the target.
// ---------------------------------------------------------------------------

inline SolveReport exterior_penalty(
    const ChannelSet& ch, const DesiredBeampattern& desired,
    const SystemConfig& cfg, std::uint64_t seed,
    const SolverOptions& opts = {},
    std::shared_ptr<const RadarGeometry> geometry = nullptr) {
  const auto start = std::chrono::steady_clock::now();
  if (!geometry)
    geometry = std::make_shared<const RadarGeometry>(
        RadarGeometry::build(desired, cfg.n_tx));
  BeamformerState state = init_state(ch, desired, cfg, seed, opts);

  if (cfg.penalty_mode == PenaltyMode::fixed_weight) {
    SolveReport report = pdd_outer(std::move(state), ch, desired, cfg, opts,
                                   std::nullopt, geometry);
    PenaltyRoundRecord round;
    round.round_idx = 0;
    round.radar_penalty = report.metrics.beampattern_mse;
    round.multiplier = 1.0;
    report.trace.penalty_rounds.push_back(round);
    report.metrics.penalty_rounds = 1;
    report.penalty_target_met =
        report.metrics.beampattern_mse <= cfg.hyper.penalty_target;
    report.metrics.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return report;
  }

  SolveReport aggregate;
  double multiplier = 1.0;
  bool target_met = false;
  int rounds = 0;
  for (int round = 0; round < cfg.hyper.max_penalty_rounds; ++round) {
    if (round > 0) {
      // Fresh dual/penalty variables for the reweighted objective; the
      // primal blocks warm-start from the previous round.
      state.psi_dual.setZero();
      state.rho = cfg.hyper.rho0;
    }
    SolveReport r = pdd_outer(state, ch, desired, cfg, opts,
                              (1.0 - cfg.mu) * multiplier, geometry);
    state = r.state;
    rounds = round + 1;

    const int outer_offset = static_cast<int>(aggregate.trace.outer.size());
    for (InnerIterationRecord rec : r.trace.inner) {
      rec.outer_idx += outer_offset;
      aggregate.trace.inner.push_back(rec);
    }
    for (OuterIterationRecord rec : r.trace.outer) {
      rec.outer_idx += outer_offset;
      aggregate.trace.outer.push_back(rec);
    }
    for (const std::string& w : r.trace.warnings)
      aggregate.trace.warnings.push_back(w);
    aggregate.trace.digital_regularized |= r.trace.digital_regularized;
    aggregate.converged = r.converged;

    PenaltyRoundRecord prec;
    prec.round_idx = round;
    prec.radar_penalty = r.metrics.beampattern_mse;
    prec.multiplier = multiplier;
    aggregate.trace.penalty_rounds.push_back(prec);

    aggregate.metrics = r.metrics;  // final-round snapshot of the metrics
    if (r.metrics.beampattern_mse <= cfg.hyper.penalty_target) {
      target_met = true;
      break;
    }
    multiplier *= cfg.hyper.varsigma;
  }
  if (!target_met)
    aggregate.trace.warnings.emplace_back(
        "radar penalty target not reached within max_penalty_rounds");

  aggregate.state = std::move(state);
  aggregate.penalty_target_met = target_met;
  aggregate.metrics.iterations_inner_total =
      static_cast<int>(aggregate.trace.inner.size());
  aggregate.metrics.iterations_outer =
      static_cast<int>(aggregate.trace.outer.size());
  aggregate.metrics.penalty_rounds = rounds;
  aggregate.metrics.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return aggregate;
}

}  // namespace isac
