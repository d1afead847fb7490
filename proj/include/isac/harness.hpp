#pragma once
// Experiment runner: Monte Carlo batches over architecture variants and one
// swept scalar parameter, persisted as per-variant trial CSVs, an aggregate
// CSV, and a JSON manifest. Numbers are written with shortest round-trip
// formatting, so the data files are byte-identical across repeated runs of
// the same spec on the same platform; wall-clock timings live only in the
// manifest.
//
// Spec files use the same flat "key = value" text format as system config
// files. Keys prefixed with "config." set SystemConfig fields and accept
// everything load_config_file does; the remaining keys describe the batch:
//
//   config.n_tx   = 10        # any config key, prefixed
//   sweep.parameter = mu      # one scalar SystemConfig field
//   sweep.values  = 0.1, 0.5, 0.9
//   variants      = proposed_hb, woirs_isac_fdb
//   trials        = 100
//   seed_base     = 1         # trial t uses seed seed_base + t
//   outputs       = out/run1  # optional; the CLI flag overrides it
//
// When sweep.parameter is omitted the batch runs at a single point: the
// trade-off weight already present in the config.

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "isac/baselines.hpp"
#include "isac/metrics.hpp"
#include "isac/version.hpp"

namespace isac {

// ---------------------------------------------------------------------------
// Deterministic number formatting (shortest round-trip, locale-independent).
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char esc[8];
          std::snprintf(esc, sizeof(esc), "\\u%04x", c);
          out += esc;
        } else {
          out += c;
        }
    }
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiment specification.
// ---------------------------------------------------------------------------

struct SweepSpec {
  std::string parameter = "mu";
  std::vector<double> values;  // one solve batch per entry
};

// Scalar SystemConfig fields a sweep may target. Integer fields require
// integral sweep values.
inline const std::vector<std::string>& sweepable_parameters() {
  static const std::vector<std::string> names = {
      "n_tx",          "n_rf",
      "n_streams",     "n_irs",
      "n_bob",         "n_eve",
      "p_max",         "mu",
      "pathloss_ref_db", "pathloss_exponent",
      "distances.ab",  "distances.ai",
      "distances.ae",  "distances.ib",
      "distances.ie"};
  return names;
}

inline SystemConfig apply_sweep_value(SystemConfig cfg,
                                      const std::string& parameter,
                                      double value) {
  const auto as_int = [&](const char* name) {
    const int i = static_cast<int>(std::lround(value));
    if (std::abs(value - i) > 1e-9)
      throw ConfigError(std::string("sweep over '") + name +
                        "' needs integer values, got " +
                        detail::format_double(value));
    return i;
  };
  if (parameter == "n_tx") cfg.n_tx = as_int("n_tx");
  else if (parameter == "n_rf") cfg.n_rf = as_int("n_rf");
  else if (parameter == "n_streams") cfg.n_streams = as_int("n_streams");
  else if (parameter == "n_irs") cfg.n_irs = as_int("n_irs");
  else if (parameter == "n_bob") cfg.n_bob = as_int("n_bob");
  else if (parameter == "n_eve") cfg.n_eve = as_int("n_eve");
  else if (parameter == "p_max") cfg.p_max = value;
  else if (parameter == "mu") cfg.mu = value;
  else if (parameter == "pathloss_ref_db") cfg.pathloss_ref_db = value;
  else if (parameter == "pathloss_exponent") cfg.pathloss_exponent = value;
  else if (parameter == "distances.ab") cfg.distances.ab = value;
  else if (parameter == "distances.ai") cfg.distances.ai = value;
  else if (parameter == "distances.ae") cfg.distances.ae = value;
  else if (parameter == "distances.ib") cfg.distances.ib = value;
  else if (parameter == "distances.ie") cfg.distances.ie = value;
  else
    throw ConfigError("unknown sweep parameter '" + parameter + "'");
  return cfg;
}

struct ExperimentSpec {
  SystemConfig config = SystemConfig::defaults();
  SweepSpec sweep;
  std::vector<ArchitectureVariant> variants = {
      ArchitectureVariant::proposed_hb};
  int trials = 1;
  std::uint64_t seed_base = 1;
  std::string outputs;

  void validate() const {
    config.validate();
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (variants.empty()) throw ConfigError("variants list is empty");
    if (sweep.values.empty())
      throw ConfigError("sweep has no values");
    bool known = false;
    for (const std::string& p : sweepable_parameters())
      known = known || p == sweep.parameter;
    if (!known)
      throw ConfigError("unknown sweep parameter '" + sweep.parameter + "'");
    // Every sweep point must yield a valid configuration.
    for (double v : sweep.values)
      apply_sweep_value(config, sweep.parameter, v).validate();
  }

  static ExperimentSpec parse(const std::string& text) {
    ExperimentSpec spec;
    std::string config_text;
    bool have_sweep_param = false, have_sweep_values = false;
    bool have_variants = false;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
      ++lineno;
      const size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("spec line " + std::to_string(lineno) +
                          ": expected 'key = value'");
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      if (key.empty() || value.empty())
        throw ConfigError("spec line " + std::to_string(lineno) +
                          ": empty key or value");
      if (!seen.insert(key).second)
        throw ConfigError("spec key '" + key + "' given twice");

      if (key.rfind("config.", 0) == 0) {
        config_text += key.substr(7) + " = " + value + "\n";
      } else if (key == "sweep.parameter") {
        spec.sweep.parameter = value;
        have_sweep_param = true;
      } else if (key == "sweep.values") {
        spec.sweep.values = detail::parse_double_list(key, value);
        have_sweep_values = true;
      } else if (key == "variants") {
        spec.variants.clear();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ','))
          spec.variants.push_back(variant_from_string(detail::trim(item)));
        have_variants = true;
      } else if (key == "trials") {
        spec.trials = detail::parse_int(key, value);
      } else if (key == "seed_base") {
        const double v = detail::parse_double(key, value);
        if (v < 0 || std::abs(v - std::llround(v)) > 1e-9)
          throw ConfigError("seed_base must be a nonnegative integer");
        spec.seed_base = static_cast<std::uint64_t>(std::llround(v));
      } else if (key == "outputs") {
        spec.outputs = value;
      } else {
        throw ConfigError("unknown spec key '" + key + "'");
      }
    }

    spec.config = parse_config_text(config_text);
    if (have_sweep_values && !have_sweep_param)
      throw ConfigError("sweep.values given without sweep.parameter");
    if (have_sweep_param && !have_sweep_values)
      throw ConfigError("sweep.parameter given without sweep.values");
    if (!have_sweep_param)
      spec.sweep.values = {spec.config.mu};  // single-point batch
    if (have_variants && spec.variants.empty())
      throw ConfigError("variants list is empty");
    spec.validate();
    return spec;
  }

  static ExperimentSpec load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open spec file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }
};

// ---------------------------------------------------------------------------
// Results.
// ---------------------------------------------------------------------------

struct TrialRecord {
  ArchitectureVariant variant = ArchitectureVariant::proposed_hb;
  double value = 0.0;  // swept parameter value
  int trial = 0;
  double secrecy_gap = 0.0;
  double secrecy_rate = 0.0;
  double beampattern_mse = 0.0;
  int iterations_inner = 0;
  int iterations_outer = 0;
  bool converged = false;
  double wall_time_sec = 0.0;  // manifest only; kept out of the CSVs
};

struct AggregateRecord {
  ArchitectureVariant variant = ArchitectureVariant::proposed_hb;
  double value = 0.0;
  int n_trials = 0;
  int n_converged = 0;
  double mean_secrecy_gap = 0.0, se_secrecy_gap = 0.0;
  double mean_secrecy_rate = 0.0, se_secrecy_rate = 0.0;
  double mean_beampattern_mse = 0.0, se_beampattern_mse = 0.0;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<TrialRecord> records;  // ordered by (variant, value, trial)
  std::vector<AggregateRecord> aggregates;
  double wall_time_sec = 0.0;
};

inline std::vector<AggregateRecord> aggregate_records(
    const std::vector<TrialRecord>& records) {
  std::vector<AggregateRecord> out;
  size_t i = 0;
  while (i < records.size()) {
    size_t j = i;
    while (j < records.size() && records[j].variant == records[i].variant &&
           records[j].value == records[i].value)
      ++j;
    AggregateRecord a;
    a.variant = records[i].variant;
    a.value = records[i].value;
    a.n_trials = static_cast<int>(j - i);
    const auto stats = [&](auto field, double* mean, double* se) {
      double sum = 0.0;
      for (size_t k = i; k < j; ++k) sum += records[k].*field;
      *mean = sum / static_cast<double>(a.n_trials);
      double ss = 0.0;
      for (size_t k = i; k < j; ++k) {
        const double d = records[k].*field - *mean;
        ss += d * d;
      }
      *se = a.n_trials > 1
                ? std::sqrt(ss / (static_cast<double>(a.n_trials) - 1.0) /
                            static_cast<double>(a.n_trials))
                : 0.0;
    };
    stats(&TrialRecord::secrecy_gap, &a.mean_secrecy_gap, &a.se_secrecy_gap);
    stats(&TrialRecord::secrecy_rate, &a.mean_secrecy_rate,
          &a.se_secrecy_rate);
    stats(&TrialRecord::beampattern_mse, &a.mean_beampattern_mse,
          &a.se_beampattern_mse);
    for (size_t k = i; k < j; ++k)
      if (records[k].converged) ++a.n_converged;
    out.push_back(a);
    i = j;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Batch execution: embarrassingly parallel over (variant, value, trial).
// Workers claim jobs through an atomic counter and write into pre-sized
// slots, so the record order is the deterministic nested loop order no
// matter how many threads run.
// ---------------------------------------------------------------------------

inline ExperimentResult run_experiment(const ExperimentSpec& spec,
                                       int n_threads = 0) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();

  struct Job {
    ArchitectureVariant variant;
    double value;
    int trial;
  };
  std::vector<Job> jobs;
  for (ArchitectureVariant v : spec.variants)
    for (double value : spec.sweep.values)
      for (int t = 0; t < spec.trials; ++t) jobs.push_back({v, value, t});

  ExperimentResult result;
  result.spec = spec;
  result.records.resize(jobs.size());

  if (n_threads < 1) {
    n_threads = static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;
  }
  n_threads = std::min<int>(n_threads, static_cast<int>(jobs.size()));

  std::atomic<size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const size_t idx = next.fetch_add(1);
      if (idx >= jobs.size()) return;
      const Job& job = jobs[idx];
      TrialRecord rec;
      rec.variant = job.variant;
      rec.value = job.value;
      rec.trial = job.trial;
      const std::uint64_t seed =
          spec.seed_base + static_cast<std::uint64_t>(job.trial);
      try {
        const SystemConfig swept =
            apply_sweep_value(spec.config, spec.sweep.parameter, job.value);
        const SolveReport report =
            solve_variant(job.variant, swept, seed);
        rec.secrecy_gap = report.metrics.secrecy_gap;
        rec.secrecy_rate = report.metrics.secrecy_rate;
        rec.beampattern_mse = report.metrics.beampattern_mse;
        rec.iterations_inner = report.metrics.iterations_inner_total;
        rec.iterations_outer = report.metrics.iterations_outer;
        rec.converged = report.converged;
        rec.wall_time_sec = report.metrics.wall_time_sec;
      } catch (const NumericalFailure&) {
        // A diverged trial is a data point, not a batch failure.
        rec.secrecy_gap = std::numeric_limits<double>::quiet_NaN();
        rec.secrecy_rate = std::numeric_limits<double>::quiet_NaN();
        rec.beampattern_mse = std::numeric_limits<double>::quiet_NaN();
        rec.converged = false;
      }
      result.records[idx] = rec;
    }
  };

  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  result.aggregates = aggregate_records(result.records);
  result.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

// ---------------------------------------------------------------------------
// Persistence. One trials CSV per variant, one aggregate CSV, one manifest.
// Column names and order are part of the public contract.
// ---------------------------------------------------------------------------

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // '\n' endings on all platforms
  if (!out)
    throw ConfigError("cannot open output file '" + path.string() + "'");
  return out;
}

}  // namespace detail

inline void write_trials_csv(const ExperimentResult& result,
                             ArchitectureVariant variant,
                             const std::filesystem::path& path) {
  std::ofstream out = detail::open_output(path);
  out << "variant,value,trial,secrecy_gap,secrecy_rate,beampattern_mse,"
         "iterations_inner,iterations_outer,converged\n";
  for (const TrialRecord& r : result.records) {
    if (r.variant != variant) continue;
    out << to_string(r.variant) << ',' << detail::format_double(r.value)
        << ',' << r.trial << ',' << detail::format_double(r.secrecy_gap)
        << ',' << detail::format_double(r.secrecy_rate) << ','
        << detail::format_double(r.beampattern_mse) << ','
        << r.iterations_inner << ',' << r.iterations_outer << ','
        << (r.converged ? 1 : 0) << '\n';
  }
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

inline void write_aggregates_csv(const ExperimentResult& result,
                                 const std::filesystem::path& path) {
  std::ofstream out = detail::open_output(path);
  out << "variant,value,n_trials,n_converged,"
         "mean_secrecy_gap,se_secrecy_gap,"
         "mean_secrecy_rate,se_secrecy_rate,"
         "mean_beampattern_mse,se_beampattern_mse\n";
  for (const AggregateRecord& a : result.aggregates) {
    out << to_string(a.variant) << ',' << detail::format_double(a.value)
        << ',' << a.n_trials << ',' << a.n_converged << ','
        << detail::format_double(a.mean_secrecy_gap) << ','
        << detail::format_double(a.se_secrecy_gap) << ','
        << detail::format_double(a.mean_secrecy_rate) << ','
        << detail::format_double(a.se_secrecy_rate) << ','
        << detail::format_double(a.mean_beampattern_mse) << ','
        << detail::format_double(a.se_beampattern_mse) << '\n';
  }
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

inline void write_manifest(const ExperimentResult& result,
                           const std::filesystem::path& path) {
  const ExperimentSpec& spec = result.spec;
  std::ofstream out = detail::open_output(path);
  out << "{\n";
  out << "  \"software_version\": \"" << kVersion << "\",\n";
  out << "  \"sweep\": {\"parameter\": \""
      << detail::json_escape(spec.sweep.parameter) << "\", \"values\": [";
  for (size_t i = 0; i < spec.sweep.values.size(); ++i)
    out << (i ? ", " : "") << detail::format_double(spec.sweep.values[i]);
  out << "]},\n";
  out << "  \"variants\": [";
  for (size_t i = 0; i < spec.variants.size(); ++i)
    out << (i ? ", " : "") << '"' << to_string(spec.variants[i]) << '"';
  out << "],\n";
  out << "  \"trials\": " << spec.trials << ",\n";
  out << "  \"seed_base\": " << spec.seed_base << ",\n";
  out << "  \"config\": {\n";
  const SystemConfig& c = spec.config;
  out << "    \"n_tx\": " << c.n_tx << ", \"n_rf\": " << c.n_rf
      << ", \"n_streams\": " << c.n_streams << ", \"n_irs\": " << c.n_irs
      << ", \"n_bob\": " << c.n_bob << ", \"n_eve\": " << c.n_eve << ",\n";
  out << "    \"p_max\": " << detail::format_double(c.p_max)
      << ", \"mu\": " << detail::format_double(c.mu) << ", \"irs_enabled\": "
      << (c.irs_enabled ? "true" : "false") << ",\n";
  out << "    \"distances\": [" << detail::format_double(c.distances.ab)
      << ", " << detail::format_double(c.distances.ai) << ", "
      << detail::format_double(c.distances.ae) << ", "
      << detail::format_double(c.distances.ib) << ", "
      << detail::format_double(c.distances.ie) << "],\n";
  out << "    \"pathloss_ref_db\": " << detail::format_double(c.pathloss_ref_db)
      << ", \"pathloss_exponent\": "
      << detail::format_double(c.pathloss_exponent) << ",\n";
  out << "    \"angle_grid_size\": " << c.angle_grid.size()
      << ", \"penalty_mode\": \""
      << (c.penalty_mode == PenaltyMode::fixed_weight ? "fixed_weight"
                                                      : "escalating")
      << "\"\n";
  out << "  },\n";
  out << "  \"n_records\": " << result.records.size() << ",\n";
  out << "  \"wall_time_sec\": " << detail::format_double(result.wall_time_sec)
      << "\n";
  out << "}\n";
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

// Writes trials_<variant>.csv per variant, aggregates.csv, manifest.json.
inline void write_experiment(const ExperimentResult& result,
                             const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    throw ConfigError("cannot create output directory '" + out_dir.string() +
                      "': " + ec.message());
  for (ArchitectureVariant v : result.spec.variants)
    write_trials_csv(result, v,
                     out_dir / ("trials_" + std::string(to_string(v)) +
                                ".csv"));
  write_aggregates_csv(result, out_dir / "aggregates.csv");
  write_manifest(result, out_dir / "manifest.json");
}

// ---------------------------------------------------------------------------
// Figure-data emitters.
// ---------------------------------------------------------------------------

// Transmit pattern of the realized precoder next to the scaled desired
// pattern, over the desired pattern's own grid.
inline void emit_beampattern(const SolveReport& report,
                             const DesiredBeampattern& desired,
                             const std::filesystem::path& path) {
  const CMatrix x = report.state.f_analog * report.state.w_digital;
  const RVector p_b = transmit_beampattern(x, desired.grid);
  std::ofstream out = detail::open_output(path);
  out << "theta_deg,p_b,delta_p_d\n";
  for (Eigen::Index k = 0; k < p_b.size(); ++k) {
    const double theta_deg = desired.grid[static_cast<size_t>(k)] / kDegToRad;
    out << detail::format_double(theta_deg) << ','
        << detail::format_double(p_b[k]) << ','
        << detail::format_double(report.state.delta *
                                 desired.values[k])
        << '\n';
  }
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

// Secrecy gap versus secrecy rate along SNR sweeps: the two quantities move
// together, which is what justifies optimizing the gap in place of the rate.
struct SnrSweep {
  std::string id;
  std::vector<double> snr_bob;
  std::vector<double> snr_eve;  // same length as snr_bob
};

inline std::vector<SnrSweep> default_fig3_sweeps() {
  std::vector<SnrSweep> sweeps(3);
  sweeps[0].id = "eve_fixed";
  sweeps[1].id = "bob_fixed";
  sweeps[2].id = "both_vary_bob_faster";
  const int n = 41;
  for (int k = 0; k < n; ++k) {
    // Geometric grid from 1 to 100.
    const double t = std::pow(100.0, k / static_cast<double>(n - 1));
    sweeps[0].snr_bob.push_back(t);
    sweeps[0].snr_eve.push_back(1.0);
    sweeps[1].snr_bob.push_back(100.0);
    sweeps[1].snr_eve.push_back(t);
    sweeps[2].snr_bob.push_back(t * t);  // Bob climbs twice as fast in dB
    sweeps[2].snr_eve.push_back(t);
  }
  return sweeps;
}

inline void emit_fig3_sweep(const std::vector<SnrSweep>& sweeps,
                            const std::filesystem::path& path) {
  std::ofstream out = detail::open_output(path);
  out << "sweep_id,snr_b,snr_e,gap,rate\n";
  for (const SnrSweep& s : sweeps) {
    if (s.snr_bob.size() != s.snr_eve.size())
      throw DimensionError("fig3 sweep '" + s.id + "': grid length mismatch");
    for (size_t k = 0; k < s.snr_bob.size(); ++k) {
      const double b = s.snr_bob[k], e = s.snr_eve[k];
      out << s.id << ',' << detail::format_double(b) << ','
          << detail::format_double(e) << ','
          << detail::format_double(std::max(0.0, b - e)) << ','
          << detail::format_double(secrecy_rate_from_snrs(b, e)) << '\n';
    }
  }
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

// Per-cycle convergence trace of one solve.
inline void emit_trace(const SolveReport& report,
                       const std::filesystem::path& path) {
  std::ofstream out = detail::open_output(path);
  out << "outer_idx,inner_idx,al_value,violation,rho,kappa,dual_updated\n";
  for (const InnerIterationRecord& r : report.trace.inner) {
    out << r.outer_idx << ',' << r.inner_idx << ','
        << detail::format_double(r.al_value) << ','
        << detail::format_double(r.violation) << ','
        << detail::format_double(r.rho) << ','
        << detail::format_double(r.kappa) << ',' << (r.dual_updated ? 1 : 0)
        << '\n';
  }
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

}  // namespace isac
