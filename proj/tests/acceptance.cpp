// Acceptance gate for the simulator. Each numbered criterion prints exactly
// one [PASS]/[FAIL] line with the measured quantities behind the verdict;
// indented lines are supporting measurements. The process exit code is the
// number of failed criteria in the selected group, so the test runner fails
// when any gate fails while the log keeps the full picture.
//
// Groups (one ctest entry each):
//   core           criteria 1-3: descent, constraint convergence, feasibility
//   oracles        criterion 4: closed-form block updates vs brute oracles
//   surrogate_suite criterion 5: majorizer tightness and touching
//   tradeoff       criterion 6: secrecy/sensing trade-off monotonicity
//   mse            criterion 7: beampattern MSE levels and architecture order
//   secrecy        criterion 8: secrecy-rate levels and architecture order
//   rf_plateau     criterion 9: rate plateau once RF chains exceed 2M
//   subconnected   criterion 10: block-diagonal analog network sanity

#include "isac/baselines.hpp"

#include "test_state_util.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace isac;

struct Criterion {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
};

void emit(const Criterion& c) {
  std::cout << (c.pass ? "[PASS]" : "[FAIL]") << " criterion " << c.id << " ("
            << c.title << "): " << c.detail << "\n";
  std::cout.flush();
}

void note(const std::string& line) {
  std::cout << "  " << line << "\n";
  std::cout.flush();
}

std::string fmt(double v, int digits = 5) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

// Midrank-based ranks, ties averaged.
std::vector<double> midranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const std::vector<double> rx = midranks(x);
  const std::vector<double> ry = midranks(y);
  const double mx = mean_of(rx);
  const double my = mean_of(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// Nonincreasing within relative slack; the absolute floor only matters when
// both values sit at the bottom of the double range.
bool descent_ok(double before, double after) {
  const double slack =
      1e-8 * std::max(std::abs(before), std::abs(after)) + 1e-15;
  return after <= before + slack;
}

// ---------------------------------------------------------------------------
// Group: core (criteria 1, 2, 3). One 100-seed pass at the default system
// size; the trace records carry per-block values and feasibility diagnostics.
// ---------------------------------------------------------------------------

std::vector<Criterion> run_core() {
  const SystemConfig cfg = SystemConfig::defaults();
  const DesiredBeampattern desired = desired_beampattern(cfg);
  const int n_seeds = 100;

  long total_steps = 0;
  long ascent_count = 0;
  double worst_ascent = 0.0;  // max of (after - before - slack) over ascents

  int final_ok = 0;
  int quick_ok = 0;
  double worst_final_violation = 0.0;

  double worst_analog_mod = 0.0;
  double worst_phi_mod = 0.0;
  double worst_power_excess = -std::numeric_limits<double>::infinity();
  double worst_active_gap = 0.0;
  long clipped_records = 0;

  Stopwatch sw;
  for (int seed = 0; seed < n_seeds; ++seed) {
    const ChannelSet ch = generate_channels(cfg, static_cast<std::uint64_t>(seed));
    const SolveReport rep = exterior_penalty(ch, desired, cfg,
                                             static_cast<std::uint64_t>(seed));

    for (const InnerIterationRecord& rec : rep.trace.inner) {
      const double chain[] = {rec.al_entry,         rec.al_after_delta,
                              rec.al_after_analog,  rec.al_after_digital,
                              rec.al_after_q,       rec.al_after_phi};
      for (int k = 0; k + 1 < 6; ++k) {
        ++total_steps;
        if (!descent_ok(chain[k], chain[k + 1])) {
          ++ascent_count;
          worst_ascent = std::max(worst_ascent, chain[k + 1] - chain[k]);
        }
      }
      worst_analog_mod = std::max(worst_analog_mod, rec.analog_modulus_err);
      worst_phi_mod = std::max(worst_phi_mod, rec.phi_modulus_err);
      worst_power_excess =
          std::max(worst_power_excess, rec.q_power - cfg.p_max);
      if (rec.q_power_clipped) {
        ++clipped_records;
        worst_active_gap =
            std::max(worst_active_gap, std::abs(rec.q_power - cfg.p_max));
      }
    }

    const double final_violation = rep.trace.outer.back().violation;
    worst_final_violation = std::max(worst_final_violation, final_violation);
    if (final_violation <= 1e-5) ++final_ok;
    bool quick = false;
    for (const OuterIterationRecord& orec : rep.trace.outer)
      if (orec.outer_idx < 6 && orec.violation < 1e-3) quick = true;
    if (quick) ++quick_ok;
  }
  const double elapsed = sw.seconds();

  std::vector<Criterion> out;
  {
    Criterion c{1, "monotone block descent", false, ""};
    c.pass = ascent_count == 0 && elapsed < 300.0;
    std::ostringstream os;
    os << n_seeds << " seeds, " << total_steps << " block steps, "
       << ascent_count << " ascents";
    if (ascent_count > 0) os << " (worst +" << fmt(worst_ascent) << ")";
    os << "; " << fmt(elapsed, 3) << " s (limit 300)";
    c.detail = os.str();
    out.push_back(c);
  }
  {
    Criterion c{2, "equality-constraint convergence", false, ""};
    c.pass = final_ok >= 95 && quick_ok >= 80 && elapsed < 600.0;
    std::ostringstream os;
    os << "final max|Q-FW| <= 1e-5 on " << final_ok << "/100 (need 95), "
       << "below 1e-3 within 6 outer rounds on " << quick_ok
       << "/100 (need 80), worst final " << fmt(worst_final_violation) << "; "
       << fmt(elapsed, 3) << " s (limit 600)";
    c.detail = os.str();
    out.push_back(c);
  }
  {
    Criterion c{3, "feasibility invariants", false, ""};
    c.pass = worst_analog_mod <= 1e-12 && worst_phi_mod <= 1e-12 &&
             worst_power_excess <= 1e-9 && worst_active_gap <= 1e-6;
    std::ostringstream os;
    os << "max analog modulus err " << fmt(worst_analog_mod) << ", max phase "
       << "modulus err " << fmt(worst_phi_mod) << ", max power excess "
       << fmt(worst_power_excess) << ", cap-active gap " << fmt(worst_active_gap)
       << " over " << clipped_records << " clipped records";
    c.detail = os.str();
    out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Group: oracles (criterion 4). Each closed-form block update is checked
// against an independent brute-force construction.
// ---------------------------------------------------------------------------

// Grid minimizer of the pattern-fit scale. Two zoom stages of 1000 points
// bracket the minimum; a quadratic interpolation of the three bracketing
// samples then locates the vertex. The interpolation step matters: the fit
// value carries a large constant term, so sample differences at spacings
// much below 1e-3 drown in rounding noise and a plain finer grid stops
// improving around 1e-5 absolute accuracy.
double delta_grid_oracle(const RVector& p_d, const RVector& p_b) {
  auto fit = [&](double d) {
    long double acc = 0.0L;
    for (Eigen::Index k = 0; k < p_d.size(); ++k) {
      const long double r =
          static_cast<long double>(d) * p_d(k) - static_cast<long double>(p_b(k));
      acc += r * r;
    }
    return acc / static_cast<long double>(p_d.size());
  };
  double lo = 0.0;
  double hi = 2.0 * p_b.maxCoeff() + 1.0;
  const int n = 1000;
  double best = 0.0;
  int best_idx = 0;
  double step = 0.0;
  for (int stage = 0; stage < 2; ++stage) {
    step = (hi - lo) / n;
    long double best_val = std::numeric_limits<long double>::infinity();
    for (int k = 0; k <= n; ++k) {
      const double d = lo + k * step;
      const long double v = fit(d);
      if (v < best_val) {
        best_val = v;
        best = d;
        best_idx = k;
      }
    }
    lo = std::max(0.0, best - step);
    hi = best + step;
  }
  if (best_idx == 0 || best_idx == n) return best;
  const long double f0 = fit(best - step);
  const long double f1 = fit(best);
  const long double f2 = fit(best + step);
  const long double denom = f0 - 2.0L * f1 + f2;
  if (denom <= 0.0L) return best;
  return best - step * static_cast<double>((f2 - f0) / (2.0L * denom));
}

struct OracleOutcome {
  std::string name;
  int instances = 0;
  int failures = 0;
  double worst = 0.0;
  std::string unit;
};

OracleOutcome oracle_delta(std::mt19937_64& rng) {
  OracleOutcome o{"pattern scale vs 1-D grid", 500, 0, 0.0, "abs diff"};
  std::uniform_int_distribution<int> pick_n(4, 10);
  std::uniform_int_distribution<int> pick_m(1, 3);
  std::uniform_int_distribution<int> pick_t(1, 3);
  std::uniform_real_distribution<double> center(-60.0, 60.0);
  std::uniform_real_distribution<double> width(10.0, 40.0);
  std::uniform_real_distribution<double> scale(0.3, 2.0);
  const std::vector<double> grid = make_angle_grid(-90.0, 90.0, 3.0);
  for (int inst = 0; inst < o.instances; ++inst) {
    const int n_tx = pick_n(rng);
    std::vector<BeamTarget> targets;
    const int n_targets = pick_t(rng);
    for (int t = 0; t < n_targets; ++t)
      targets.push_back({center(rng) * kDegToRad, width(rng) * kDegToRad});
    const DesiredBeampattern desired = desired_beampattern(targets, grid);
    const RadarGeometry geom = RadarGeometry::build(desired, n_tx);
    const CMatrix q = test::random_cmatrix(rng, n_tx, pick_m(rng), scale(rng));
    const double d_hat = update_delta(q, geom);
    const RVector p_b = transmit_beampattern_cached(q, geom.steering);
    const double d_grid = delta_grid_oracle(geom.p_d, p_b);
    const double diff = std::abs(d_hat - d_grid);
    o.worst = std::max(o.worst, diff);
    if (diff > 1e-6) ++o.failures;
  }
  return o;
}

OracleOutcome oracle_unit_modulus(std::mt19937_64& rng) {
  OracleOutcome o{"phase alignment vs phase grid", 200, 0, 0.0,
                  "objective excess"};
  std::uniform_int_distribution<int> pick_n(1, 4);
  for (int inst = 0; inst < o.instances; ++inst) {
    const int n = pick_n(rng);
    const CVector k = test::random_cvector(rng, n);
    const CVector f = unit_modulus_linear_min(k);
    auto objective = [&](const CVector& v) {
      return -2.0 * std::real(cxd(v.adjoint() * k));
    };
    // The objective separates per entry, so the grid scans each phase alone.
    double grid_best = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double entry_best = std::numeric_limits<double>::infinity();
      for (double th = 0.0; th < 2.0 * std::numbers::pi; th += 1e-2) {
        const double v = -2.0 * std::real(std::conj(std::polar(1.0, th)) * k(i));
        entry_best = std::min(entry_best, v);
      }
      grid_best += entry_best;
    }
    const double excess = objective(f) - grid_best;
    o.worst = std::max(o.worst, excess);
    if (excess > 1e-3) ++o.failures;
  }
  return o;
}

OracleOutcome oracle_q_update(std::mt19937_64& rng) {
  OracleOutcome o{"power-capped quadratic vs dense solve + root", 200, 0, 0.0,
                  "linf diff"};
  std::uniform_int_distribution<int> pick_n(3, 8);
  std::uniform_int_distribution<int> pick_m(1, 3);
  std::uniform_real_distribution<double> pick_rho(0.05, 1.0);
  std::uniform_real_distribution<double> pick_pmax(0.5, 2.0);
  for (int inst = 0; inst < o.instances; ++inst) {
    const int n = pick_n(rng);
    const int n_rf = std::min(n, 2 + static_cast<int>(rng() % 3));
    const int m = std::min(n_rf, pick_m(rng));
    BeamformerState s;
    s.f_analog = test::random_phase_matrix(rng, n, n_rf);
    // Alternate small and large digital stages so both the interior solution
    // and the active power cap are exercised.
    const double w_scale = (inst % 2 == 0) ? 0.05 : 2.0;
    s.w_digital = test::random_cmatrix(rng, n_rf, m, w_scale);
    s.psi_dual = test::random_cmatrix(rng, n, m, 0.1);
    s.rho = pick_rho(rng);
    QSurrogate qs;
    qs.z1 = test::random_psd(rng, n);
    qs.z3 = test::random_cmatrix(rng, n, m);
    const double p_max = pick_pmax(rng);

    const QUpdate qu = update_q_with_surrogate(s, qs, p_max);

    const CMatrix a0 = 2.0 * s.rho * qs.z1;
    const CMatrix rhs =
        s.f_analog * s.w_digital - s.rho * qs.z3 - s.rho * s.psi_dual;
    const CMatrix eye = CMatrix::Identity(n, n);
    auto q_at = [&](double alpha) {
      return CMatrix(
          (a0 + (1.0 + 2.0 * s.rho * alpha) * eye).ldlt().solve(rhs));
    };
    CMatrix q_oracle = q_at(0.0);
    if (q_oracle.squaredNorm() > p_max) {
      double lo = 0.0;
      double hi = 1.0;
      while (q_at(hi).squaredNorm() > p_max) hi *= 2.0;
      // Match the implementation's stopping rule: approach the cap from the
      // feasible side until the power deficit falls below 1e-6.
      while (p_max - q_at(hi).squaredNorm() > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        if (q_at(mid).squaredNorm() > p_max)
          lo = mid;
        else
          hi = mid;
      }
      q_oracle = q_at(hi);
    }
    const double diff = linf_norm(CMatrix(qu.q - q_oracle));
    o.worst = std::max(o.worst, diff);
    if (diff > 1e-6) ++o.failures;
  }
  return o;
}

OracleOutcome oracle_digital(std::mt19937_64& rng) {
  OracleOutcome o{"digital LS stationarity by finite differences", 200, 0, 0.0,
                  "gradient norm"};
  std::uniform_int_distribution<int> pick_n(3, 8);
  std::uniform_int_distribution<int> pick_m(1, 3);
  std::uniform_real_distribution<double> pick_rho(0.05, 1.0);
  for (int inst = 0; inst < o.instances; ++inst) {
    const int n = pick_n(rng);
    const int n_rf = std::min(n, 2 + static_cast<int>(rng() % 3));
    const int m = std::min(n_rf, pick_m(rng));
    const CMatrix f = test::random_phase_matrix(rng, n, n_rf);
    const CMatrix q = test::random_cmatrix(rng, n, m);
    const CMatrix psi = test::random_cmatrix(rng, n, m, 0.1);
    const double rho = pick_rho(rng);
    const CMatrix w = update_digital(f, q, psi, rho).w;
    auto g = [&](const CMatrix& wv) {
      const CMatrix resid = q - f * wv;
      return std::real((psi.adjoint() * resid).trace()) +
             resid.squaredNorm() / (2.0 * rho);
    };
    const double h = 1e-5;
    double grad_sq = 0.0;
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        for (int part = 0; part < 2; ++part) {
          const cxd delta = part == 0 ? cxd(h, 0.0) : cxd(0.0, h);
          CMatrix wp = w, wm = w;
          wp(i, j) += delta;
          wm(i, j) -= delta;
          const double d = (g(wp) - g(wm)) / (2.0 * h);
          grad_sq += d * d;
        }
      }
    }
    const double grad_norm = std::sqrt(grad_sq);
    o.worst = std::max(o.worst, grad_norm);
    if (grad_norm > 1e-6) ++o.failures;
  }
  return o;
}

std::vector<Criterion> run_oracles() {
  Stopwatch sw;
  std::mt19937_64 rng(20240816);
  const OracleOutcome outcomes[] = {
      oracle_delta(rng),
      oracle_unit_modulus(rng),
      oracle_q_update(rng),
      oracle_digital(rng),
  };
  const double elapsed = sw.seconds();

  int total_failures = 0;
  for (const OracleOutcome& oc : outcomes) {
    total_failures += oc.failures;
    std::ostringstream os;
    os << oc.name << ": " << oc.failures << "/" << oc.instances
       << " failures, worst " << oc.unit << " " << fmt(oc.worst);
    note(os.str());
  }

  Criterion c{4, "closed-form block oracles", false, ""};
  c.pass = total_failures == 0 && elapsed < 600.0;
  std::ostringstream os;
  os << total_failures << " oracle mismatches across 1100 instances; "
     << fmt(elapsed, 3) << " s (limit 600)";
  c.detail = os.str();
  return {c};
}

// ---------------------------------------------------------------------------
// Group: surrogate_suite (criterion 5). Tightness (surrogate + fitted offset
// stays above the exact objective) and touching (equality at the expansion
// point, preserved to first order nearby) for all three majorizer
// constructions, 500 probes each.
// ---------------------------------------------------------------------------

SystemConfig surrogate_config() {
  SystemConfig cfg = SystemConfig::defaults();
  cfg.n_tx = 6;
  cfg.n_rf = 3;
  cfg.n_streams = 2;
  cfg.n_irs = 8;
  cfg.n_bob = 2;
  cfg.n_eve = 2;
  cfg.angle_grid = make_angle_grid(-90.0, 90.0, 10.0);
  return cfg;
}

double tight_slack(double a, double b) {
  return 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

struct SurrogateOutcome {
  std::string name;
  int probes = 0;
  int violations = 0;
  double worst_gap = 0.0;  // most negative (surrogate+offset) - exact
};

void check_probe(SurrogateOutcome& oc, double exact, double bound) {
  ++oc.probes;
  const double margin = bound - exact;
  if (margin < -tight_slack(exact, bound)) {
    ++oc.violations;
    oc.worst_gap = std::min(oc.worst_gap, margin);
  }
}

std::vector<Criterion> run_surrogates() {
  Stopwatch sw;
  const SystemConfig cfg = surrogate_config();
  const DesiredBeampattern desired = desired_beampattern(cfg);
  std::mt19937_64 rng(77007);

  SurrogateOutcome analog{"analog network majorizer", 0, 0, 0.0};
  SurrogateOutcome precoder{"auxiliary precoder majorizer", 0, 0, 0.0};
  SurrogateOutcome phases{"reflection phase majorizer", 0, 0, 0.0};
  int offset_mismatches = 0;

  const int n_instances = 10;
  const int n_probes = 50;
  for (int inst = 0; inst < n_instances; ++inst) {
    const ChannelSet ch =
        generate_channels(cfg, static_cast<std::uint64_t>(9000 + inst));
    BeamformerState s = test::random_state(rng, cfg);

    // Analog block: exact objective vs row-wise spectral majorizer. The
    // surrogate drops a constant the update never needs; fitting it at the
    // anchor must recover the analytic value ||Q + rho Psi||^2 / (2 rho).
    {
      const FUpdateTerms terms =
          build_f_update_terms(s.w_digital, s.q_aux, s.psi_dual, s.rho);
      const double exact_anchor =
          f_block_exact(s.f_analog, s.w_digital, s.q_aux, s.psi_dual, s.rho);
      const double surr_anchor =
          f_block_surrogate(s.f_analog, s.f_analog, terms, s.rho);
      const double offset = exact_anchor - surr_anchor;
      const double analytic =
          (s.q_aux + s.rho * s.psi_dual).squaredNorm() / (2.0 * s.rho);
      if (std::abs(offset - analytic) > tight_slack(offset, analytic))
        ++offset_mismatches;
      for (int p = 0; p < n_probes; ++p) {
        CMatrix f_probe;
        if (p < 5) {
          // Near-anchor probes: the majorizer touches at the anchor, so a
          // small phase perturbation must keep the gap at rounding level.
          f_probe = s.f_analog;
          for (Eigen::Index j = 0; j < f_probe.cols(); ++j)
            for (Eigen::Index i = 0; i < f_probe.rows(); ++i)
              f_probe(i, j) *=
                  std::polar(1.0, 1e-7 * (static_cast<double>(rng() % 200) - 100.0) / 100.0);
        } else {
          f_probe = test::random_phase_matrix(rng, cfg.n_tx, cfg.n_rf);
        }
        const double exact =
            f_block_exact(f_probe, s.w_digital, s.q_aux, s.psi_dual, s.rho);
        const double surr =
            f_block_surrogate(f_probe, s.f_analog, terms, s.rho) + offset;
        check_probe(analog, exact, surr);
      }
    }

    // Precoder block: exact weighted objective vs the quadratic-plus-quartic
    // majorizer, constant offset fitted at the anchor, probes inside the
    // power ball where the update operates.
    {
      const double radar_weight = 1.0 - cfg.mu;
      const QSurrogate qs = build_q_surrogate(s, ch, desired, cfg);
      const double exact_anchor = q_exact_objective(
          s.q_aux, ch, s.phi, desired, cfg.mu, s.delta, radar_weight);
      const double offset = exact_anchor - q_majorizer_value(qs, s.q_aux);
      for (int p = 0; p < n_probes; ++p) {
        CMatrix q_probe;
        if (p < 5) {
          q_probe =
              s.q_aux + test::random_cmatrix(rng, cfg.n_tx, cfg.n_streams, 1e-7);
        } else {
          q_probe = test::random_cmatrix(rng, cfg.n_tx, cfg.n_streams);
          const double radius =
              std::sqrt(cfg.p_max) * (0.1 + 0.9 * (rng() % 1000) / 1000.0);
          q_probe *= radius / q_probe.norm();
        }
        const double exact = q_exact_objective(q_probe, ch, s.phi, desired,
                                               cfg.mu, s.delta, radar_weight);
        const double surr = q_majorizer_value(qs, q_probe) + offset;
        check_probe(precoder, exact, surr);
      }
    }

    // Phase block: exact quadratic vs spectral majorizer plus the shared
    // linear term; the offset fit is degenerate (zero) by construction.
    {
      const PhiQuadratic pq = build_phi_quadratic(ch, s.q_aux);
      const CMatrix ph = pq.ph_mat();
      const double lmax = max_eigenvalue(ph);
      auto surrogate_value = [&](const CVector& phi) {
        return quadratic_majorizer_value(ph, lmax, phi, s.phi) +
               2.0 * std::real(cxd(phi.adjoint() * (pq.j_vec.conjugate() -
                                                    pq.o_vec.conjugate())));
      };
      const double exact_anchor = phi_exact_objective(pq, s.phi);
      const double offset = exact_anchor - surrogate_value(s.phi);
      for (int p = 0; p < n_probes; ++p) {
        CVector phi_probe;
        if (p < 5) {
          phi_probe = s.phi;
          for (Eigen::Index i = 0; i < phi_probe.size(); ++i)
            phi_probe(i) *=
                std::polar(1.0, 1e-7 * (static_cast<double>(rng() % 200) - 100.0) / 100.0);
        } else {
          phi_probe = test::random_unit_phases(rng, cfg.n_irs);
        }
        const double exact = phi_exact_objective(pq, phi_probe);
        const double surr = surrogate_value(phi_probe) + offset;
        check_probe(phases, exact, surr);
      }
    }
  }

  const double elapsed = sw.seconds();
  int violations = offset_mismatches;
  for (const SurrogateOutcome* oc : {&analog, &precoder, &phases}) {
    violations += oc->violations;
    std::ostringstream os;
    os << oc->name << ": " << oc->violations << "/" << oc->probes
       << " tightness violations";
    if (oc->violations > 0) os << ", worst gap " << fmt(oc->worst_gap);
    note(os.str());
  }
  if (offset_mismatches > 0)
    note("analog offset fit disagreed with the analytic constant " +
         std::to_string(offset_mismatches) + " times");

  Criterion c{5, "majorizer tightness and touching", false, ""};
  c.pass = violations == 0;
  std::ostringstream os;
  os << violations << " violations across " << (analog.probes + precoder.probes + phases.probes)
     << " probes (3 constructions x 500); " << fmt(elapsed, 3) << " s";
  c.detail = os.str();
  return {c};
}

// ---------------------------------------------------------------------------
// Group: tradeoff (criterion 6). Sweep the trade-off weight and test rank
// monotonicity of the mean secrecy rate (up) and mean 1/MSE (down).
// ---------------------------------------------------------------------------

std::vector<Criterion> run_tradeoff() {
  Stopwatch sw;
  const int n_trials = 50;
  std::vector<double> mus;
  for (int k = 1; k <= 19; ++k) mus.push_back(0.05 * k);

  std::vector<double> mean_rate, mean_inv_mse;
  for (double mu : mus) {
    SystemConfig cfg = SystemConfig::defaults();
    cfg.mu = mu;
    std::vector<double> rates, inv_mses;
    for (int trial = 0; trial < n_trials; ++trial) {
      const SolveReport rep =
          solve_variant(ArchitectureVariant::proposed_hb, cfg,
                        static_cast<std::uint64_t>(trial));
      rates.push_back(rep.metrics.secrecy_rate);
      inv_mses.push_back(1.0 / rep.metrics.beampattern_mse);
    }
    mean_rate.push_back(mean_of(rates));
    mean_inv_mse.push_back(mean_of(inv_mses));
    note("mu " + fmt(mu, 3) + ": mean rate " + fmt(mean_rate.back()) +
         ", mean 1/MSE " + fmt(mean_inv_mse.back()));
  }
  const double elapsed = sw.seconds();

  const double rho_rate = spearman(mus, mean_rate);
  const double rho_inv_mse = spearman(mus, mean_inv_mse);

  Criterion c{6, "secrecy/sensing trade-off trend", false, ""};
  c.pass = rho_rate >= 0.9 && rho_inv_mse <= -0.9 && elapsed < 1800.0;
  std::ostringstream os;
  os << "Spearman(weight, mean rate) = " << fmt(rho_rate, 4)
     << " (need >= 0.9), Spearman(weight, mean 1/MSE) = " << fmt(rho_inv_mse, 4)
     << " (need <= -0.9); " << n_trials << " trials x " << mus.size()
     << " weights; " << fmt(elapsed, 3) << " s (limit 1800)";
  c.detail = os.str();
  return {c};
}

// ---------------------------------------------------------------------------
// Group: mse (criterion 7). Beampattern MSE level at 24 transmit antennas for
// both target layouts, plus the architecture ordering across the antenna
// sweep.
// ---------------------------------------------------------------------------

std::vector<Criterion> run_mse() {
  Stopwatch sw;
  const std::vector<int> antennas = {8, 16, 24, 32, 40};
  const std::vector<ArchitectureVariant> variants = {
      ArchitectureVariant::proposed_hb, ArchitectureVariant::woirs_isac_fdb};

  double level_case1 = 0.0, level_case2 = 0.0;
  bool ordering_ok = true;
  std::string ordering_breaks;

  for (int case_id = 1; case_id <= 2; ++case_id) {
    for (int n_tx : antennas) {
      SystemConfig cfg = SystemConfig::defaults();
      cfg.targets = case_id == 1 ? beampattern_case1() : beampattern_case2();
      cfg.n_tx = n_tx;
      const int trials = n_tx == 24 ? 100 : 25;
      std::map<ArchitectureVariant, double> means;
      for (ArchitectureVariant v : variants) {
        std::vector<double> mses;
        for (int trial = 0; trial < trials; ++trial)
          mses.push_back(solve_variant(v, cfg, static_cast<std::uint64_t>(trial))
                             .metrics.beampattern_mse);
        means[v] = mean_of(mses);
      }
      const double m_prop = means[ArchitectureVariant::proposed_hb];
      const double m_woirs = means[ArchitectureVariant::woirs_isac_fdb];
      note("layout " + std::to_string(case_id) + ", " + std::to_string(n_tx) +
           " antennas (" + std::to_string(trials) + " trials): proposed MSE " +
           fmt(m_prop) + ", no-surface digital MSE " + fmt(m_woirs));
      if (!(m_prop < m_woirs)) {
        ordering_ok = false;
        ordering_breaks += " [layout " + std::to_string(case_id) + ", n_tx " +
                           std::to_string(n_tx) + "]";
      }
      if (n_tx == 24) {
        if (case_id == 1)
          level_case1 = m_prop;
        else
          level_case2 = m_prop;
      }
    }
  }
  const double elapsed = sw.seconds();

  const bool level1_ok = std::abs(level_case1 - 0.0049) <= 0.3 * 0.0049;
  const bool level2_ok = std::abs(level_case2 - 0.0135) <= 0.3 * 0.0135;

  Criterion c{7, "beampattern MSE reproduction", false, ""};
  c.pass = level1_ok && level2_ok && ordering_ok;
  std::ostringstream os;
  os << "24-antenna mean MSE: layout 1 " << fmt(level_case1)
     << " (target 0.0049 +/- 30%" << (level1_ok ? ", ok" : ", off") << "), "
     << "layout 2 " << fmt(level_case2) << " (target 0.0135 +/- 30%"
     << (level2_ok ? ", ok" : ", off") << "); ordering proposed < no-surface "
     << "digital " << (ordering_ok ? "holds at every antenna count"
                                   : "breaks at" + ordering_breaks)
     << "; " << fmt(elapsed, 3) << " s";
  c.detail = os.str();
  return {c};
}

// ---------------------------------------------------------------------------
// Group: secrecy (criterion 8). Secrecy-rate level at the six-antenna
// eavesdropper and six-antenna receiver points, plus architecture ordering
// across both receive-array sweeps.
// ---------------------------------------------------------------------------

std::vector<Criterion> run_secrecy() {
  Stopwatch sw;
  const std::vector<int> sizes = {2, 4, 6, 8};
  const std::vector<ArchitectureVariant> variants = {
      ArchitectureVariant::proposed_hb, ArchitectureVariant::irs_isac_fdb,
      ArchitectureVariant::woirs_isac_fdb, ArchitectureVariant::woirs_c_hb,
      ArchitectureVariant::woirs_c_fdb};

  double anchor_eve = 0.0, anchor_bob = 0.0;
  bool ordering_ok = true;
  bool fdb_gap_ok = true;
  std::string breaks;

  for (int axis = 0; axis < 2; ++axis) {
    const char* axis_name = axis == 0 ? "eavesdropper antennas" : "receiver antennas";
    for (int size : sizes) {
      SystemConfig cfg = SystemConfig::defaults();
      if (axis == 0)
        cfg.n_eve = size;
      else
        cfg.n_bob = size;
      const int trials = size == 6 ? 100 : 25;
      std::map<ArchitectureVariant, double> means;
      for (ArchitectureVariant v : variants) {
        std::vector<double> rates;
        for (int trial = 0; trial < trials; ++trial)
          rates.push_back(solve_variant(v, cfg, static_cast<std::uint64_t>(trial))
                              .metrics.secrecy_rate);
        means[v] = mean_of(rates);
      }
      const double r_prop = means[ArchitectureVariant::proposed_hb];
      const double r_fdb = means[ArchitectureVariant::irs_isac_fdb];
      note(std::string(axis_name) + " = " + std::to_string(size) + " (" +
           std::to_string(trials) + " trials): proposed " + fmt(r_prop) +
           ", surface digital " + fmt(r_fdb) + ", no-surface digital " +
           fmt(means[ArchitectureVariant::woirs_isac_fdb]) +
           ", no-surface comm hybrid " +
           fmt(means[ArchitectureVariant::woirs_c_hb]) +
           ", no-surface comm digital " +
           fmt(means[ArchitectureVariant::woirs_c_fdb]));
      const bool above_all =
          r_prop > means[ArchitectureVariant::woirs_c_fdb] &&
          r_prop > means[ArchitectureVariant::woirs_c_hb] &&
          r_prop > means[ArchitectureVariant::woirs_isac_fdb];
      if (!above_all) {
        ordering_ok = false;
        breaks += std::string(" [order at ") + axis_name + " " +
                  std::to_string(size) + "]";
      }
      if (r_fdb - r_prop > 0.10 * std::abs(r_prop)) {
        fdb_gap_ok = false;
        breaks += std::string(" [digital gap at ") + axis_name + " " +
                  std::to_string(size) + "]";
      }
      if (axis == 0 && size == 6) anchor_eve = r_prop;
      if (axis == 1 && size == 6) anchor_bob = r_prop;
    }
  }
  const double elapsed = sw.seconds();

  const bool level_eve_ok = std::abs(anchor_eve - 6.5114) <= 0.25 * 6.5114;
  const bool level_bob_ok = std::abs(anchor_bob - 6.8428) <= 0.25 * 6.8428;

  Criterion c{8, "secrecy-rate reproduction", false, ""};
  c.pass = level_eve_ok && level_bob_ok && ordering_ok && fdb_gap_ok;
  std::ostringstream os;
  os << "mean rate at 6 eavesdropper antennas " << fmt(anchor_eve)
     << " (target 6.5114 +/- 25%" << (level_eve_ok ? ", ok" : ", off")
     << "), at 6 receiver antennas " << fmt(anchor_bob)
     << " (target 6.8428 +/- 25%" << (level_bob_ok ? ", ok" : ", off")
     << "); ordering " << (ordering_ok ? "holds" : "breaks") << ", digital gap "
     << (fdb_gap_ok ? "within 10%" : "exceeds 10%");
  if (!breaks.empty()) os << ";" << breaks;
  os << "; " << fmt(elapsed, 3) << " s";
  c.detail = os.str();
  return {c};
}

// ---------------------------------------------------------------------------
// Group: rf_plateau (criterion 9). Rate as a function of the RF-chain count
// with two streams: eight chains should already sit within 5% of ten and
// within 8% of the fully digital reference.
// ---------------------------------------------------------------------------

std::vector<Criterion> run_rf_plateau() {
  Stopwatch sw;
  const int n_trials = 100;

  std::map<int, double> rate_by_rf;
  for (int n_rf = 2; n_rf <= 10; ++n_rf) {
    SystemConfig cfg = SystemConfig::defaults();
    cfg.n_rf = n_rf;
    std::vector<double> rates;
    for (int trial = 0; trial < n_trials; ++trial)
      rates.push_back(solve_variant(ArchitectureVariant::proposed_hb, cfg,
                                    static_cast<std::uint64_t>(trial))
                          .metrics.secrecy_rate);
    rate_by_rf[n_rf] = mean_of(rates);
    note(std::to_string(n_rf) + " RF chains: mean rate " +
         fmt(rate_by_rf[n_rf]));
  }
  std::vector<double> fdb_rates;
  for (int trial = 0; trial < n_trials; ++trial)
    fdb_rates.push_back(solve_variant(ArchitectureVariant::irs_isac_fdb,
                                      SystemConfig::defaults(),
                                      static_cast<std::uint64_t>(trial))
                            .metrics.secrecy_rate);
  const double rate_fdb = mean_of(fdb_rates);
  note("fully digital reference: mean rate " + fmt(rate_fdb));
  const double elapsed = sw.seconds();

  const double r8 = rate_by_rf[8];
  const double r10 = rate_by_rf[10];
  const bool near_ten = std::abs(r8 - r10) <= 0.05 * std::abs(r10);
  const bool near_fdb = std::abs(r8 - rate_fdb) <= 0.08 * std::abs(rate_fdb);

  Criterion c{9, "RF-chain plateau", false, ""};
  c.pass = near_ten && near_fdb && elapsed < 1800.0;
  std::ostringstream os;
  os << "rate at 8 chains " << fmt(r8) << " vs 10 chains " << fmt(r10)
     << " (|gap| " << fmt(std::abs(r8 - r10)) << ", 5% bound "
     << fmt(0.05 * std::abs(r10)) << (near_ten ? ", ok" : ", off")
     << ") and vs fully digital " << fmt(rate_fdb) << " (|gap| "
     << fmt(std::abs(r8 - rate_fdb)) << ", 8% bound "
     << fmt(0.08 * std::abs(rate_fdb)) << (near_fdb ? ", ok" : ", off")
     << "); " << fmt(elapsed, 3) << " s (limit 1800)";
  c.detail = os.str();
  return {c};
}

// ---------------------------------------------------------------------------
// Group: subconnected (criterion 10). The block-diagonal analog network must
// run through the same machinery with the descent and feasibility invariants
// intact, and cannot beat the fully connected network on average (its
// feasible set is a strict subset).
// ---------------------------------------------------------------------------

std::vector<Criterion> run_subconnected() {
  Stopwatch sw;
  // Short-range geometry so the secrecy comparison is made where the rates
  // are far from rounding level.
  SystemConfig cfg = SystemConfig::defaults();
  cfg.n_tx = 8;
  cfg.n_rf = 4;
  cfg.n_streams = 2;
  cfg.n_irs = 8;
  cfg.n_bob = 2;
  cfg.n_eve = 2;
  cfg.angle_grid = make_angle_grid(-90.0, 90.0, 10.0);
  cfg.pathloss_ref_db = 0.0;
  cfg.distances = {2.0, 0.5, 2.0, 0.5, 0.5};

  const int n_seeds = 50;
  int converged = 0;
  long ascents = 0;
  double worst_analog_mod = 0.0, worst_phi_mod = 0.0;
  double worst_power_excess = -std::numeric_limits<double>::infinity();
  double worst_active_gap = 0.0;
  std::vector<double> sub_rates, full_rates;

  for (int seed = 0; seed < n_seeds; ++seed) {
    const SolveReport sub =
        solve_variant(ArchitectureVariant::subconnected_hb, cfg,
                      static_cast<std::uint64_t>(seed));
    const SolveReport full = solve_variant(
        ArchitectureVariant::proposed_hb, cfg, static_cast<std::uint64_t>(seed));
    if (sub.converged) ++converged;
    sub_rates.push_back(sub.metrics.secrecy_rate);
    full_rates.push_back(full.metrics.secrecy_rate);
    for (const InnerIterationRecord& rec : sub.trace.inner) {
      const double chain[] = {rec.al_entry,         rec.al_after_delta,
                              rec.al_after_analog,  rec.al_after_digital,
                              rec.al_after_q,       rec.al_after_phi};
      for (int k = 0; k + 1 < 6; ++k)
        if (!descent_ok(chain[k], chain[k + 1])) ++ascents;
      worst_analog_mod = std::max(worst_analog_mod, rec.analog_modulus_err);
      worst_phi_mod = std::max(worst_phi_mod, rec.phi_modulus_err);
      worst_power_excess =
          std::max(worst_power_excess, rec.q_power - cfg.p_max);
      if (rec.q_power_clipped)
        worst_active_gap =
            std::max(worst_active_gap, std::abs(rec.q_power - cfg.p_max));
    }
  }
  const double elapsed = sw.seconds();

  const double mean_sub = mean_of(sub_rates);
  const double mean_full = mean_of(full_rates);
  const bool invariants_ok = ascents == 0 && worst_analog_mod <= 1e-12 &&
                             worst_phi_mod <= 1e-12 &&
                             worst_power_excess <= 1e-9 &&
                             worst_active_gap <= 1e-6;

  Criterion c{10, "sub-connected sanity", false, ""};
  c.pass = converged == n_seeds && invariants_ok && mean_sub <= mean_full;
  std::ostringstream os;
  os << converged << "/" << n_seeds << " converged, " << ascents
     << " descent violations, max modulus errs " << fmt(worst_analog_mod)
     << "/" << fmt(worst_phi_mod) << ", max power excess "
     << fmt(worst_power_excess) << ", cap-active gap " << fmt(worst_active_gap)
     << "; mean rate " << fmt(mean_sub) << " (block-diagonal) vs "
     << fmt(mean_full) << " (fully connected)"
     << (mean_sub <= mean_full ? ", ordered" : ", inverted") << "; "
     << fmt(elapsed, 3) << " s";
  c.detail = os.str();
  return {c};
}

}  // namespace

int main(int argc, char** argv) {
  std::string group = "all";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--group" && i + 1 < argc) {
      group = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--group core|oracles|surrogate_suite|"
                   "tradeoff|mse|secrecy|rf_plateau|subconnected|all]\n";
      return 64;
    }
  }

  using GroupFn = std::vector<Criterion> (*)();
  const std::vector<std::pair<std::string, GroupFn>> groups = {
      {"core", &run_core},
      {"oracles", &run_oracles},
      {"surrogate_suite", &run_surrogates},
      {"tradeoff", &run_tradeoff},
      {"mse", &run_mse},
      {"secrecy", &run_secrecy},
      {"rf_plateau", &run_rf_plateau},
      {"subconnected", &run_subconnected},
  };

  std::vector<Criterion> results;
  bool matched = false;
  for (const auto& [name, fn] : groups) {
    if (group != "all" && group != name) continue;
    matched = true;
    const std::vector<Criterion> part = fn();
    for (const Criterion& c : part) {
      emit(c);
      results.push_back(c);
    }
  }
  if (!matched) {
    std::cerr << "unknown group: " << group << "\n";
    return 64;
  }

  int failures = 0;
  for (const Criterion& c : results)
    if (!c.pass) ++failures;
  std::cout << "acceptance group " << group << ": "
            << (results.size() - static_cast<std::size_t>(failures)) << "/"
            << results.size() << " criteria passed\n";
  return failures;
}
