#pragma once
// Simulation world: system configuration, seeded Rayleigh channels with
// distance-based path loss, ULA steering vectors, and desired beampatterns.

#include "isac/numerics.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace isac {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kDegToRad = std::numbers::pi / 180.0;

struct Distances {
  double ab = 80.0;
  double ai = 30.0;
  double ae = 80.0;
  double ib = 40.0;
  double ie = 40.0;
};

enum class PenaltyMode { fixed_weight, escalating };

struct HyperParams {
  double varsigma = 1.1;       // escalation factor per penalty round
  double rho0 = 0.1;           // initial penalty parameter
  double kappa0 = 0.9;         // initial dual-update threshold
  double eps_inner = 1e-5;     // initial inner relative-change tolerance
  double eps_stop = 1e-5;      // outer stop on ||Q - FW||_inf
  double c_shrink = 0.7;       // penalty shrink factor
  int max_inner_iters = 200;
  int max_outer_iters = 100;
  int max_penalty_rounds = 30;
  double penalty_target = 1e-5;  // escalating mode: required radar penalty
};

struct BeamTarget {
  double center = 0.0;  // radians
  double width = 0.0;   // radians, full width
};

struct SystemConfig {
  int n_tx = 10;
  int n_rf = 4;
  int n_streams = 2;
  int n_irs = 32;
  int n_bob = 4;
  int n_eve = 4;
  double p_max = 1.0;  // linear watts
  double mu = 0.5;
  // When false, the reflecting-surface channels are zeroed after drawing,
  // which keeps the direct-link draws identical across paired comparisons.
  bool irs_enabled = true;
  std::vector<double> angle_grid;  // radians, ascending in [-pi/2, pi/2]
  Distances distances;
  double pathloss_ref_db = -30.0;
  double pathloss_exponent = 3.0;
  HyperParams hyper;
  PenaltyMode penalty_mode = PenaltyMode::fixed_weight;
  std::vector<BeamTarget> targets;  // desired-beampattern plateaus

  static SystemConfig defaults();
  void validate() const;
};

inline std::vector<double> make_angle_grid(double min_deg, double max_deg,
                                           double step_deg) {
  if (step_deg <= 0.0) throw ConfigError("angle grid step must be positive");
  if (max_deg < min_deg) throw ConfigError("angle grid bounds reversed");
  const int count = static_cast<int>(std::lround((max_deg - min_deg) / step_deg)) + 1;
  std::vector<double> grid(count);
  for (int k = 0; k < count; ++k)
    grid[k] = (min_deg + k * step_deg) * kDegToRad;
  return grid;
}

// Three plateaus at -40/0/40 degrees, 20 degrees wide: the default pattern.
inline std::vector<BeamTarget> beampattern_case2() {
  return {{-40.0 * kDegToRad, 20.0 * kDegToRad},
          {0.0, 20.0 * kDegToRad},
          {40.0 * kDegToRad, 20.0 * kDegToRad}};
}

// Single plateau at 0 degrees, 60 degrees wide.
inline std::vector<BeamTarget> beampattern_case1() {
  return {{0.0, 60.0 * kDegToRad}};
}

inline SystemConfig SystemConfig::defaults() {
  SystemConfig cfg;
  cfg.angle_grid = make_angle_grid(-90.0, 90.0, 1.0);
  cfg.targets = beampattern_case2();
  return cfg;
}

inline void SystemConfig::validate() const {
  if (n_tx < 1 || n_rf < 1 || n_streams < 1 || n_irs < 1 || n_bob < 1 ||
      n_eve < 1)
    throw ConfigError("all array sizes must be at least 1");
  if (n_rf > n_tx) throw ConfigError("n_rf must not exceed n_tx");
  if (n_streams > n_rf) throw ConfigError("n_streams must not exceed n_rf");
  if (!(p_max > 0.0)) throw ConfigError("p_max must be positive");
  if (!(mu >= 0.0 && mu <= 1.0)) throw ConfigError("mu must lie in [0,1]");
  if (angle_grid.empty()) throw ConfigError("angle grid is empty");
  constexpr double half_pi = std::numbers::pi / 2.0;
  for (size_t k = 0; k < angle_grid.size(); ++k) {
    if (angle_grid[k] < -half_pi - 1e-9 || angle_grid[k] > half_pi + 1e-9)
      throw ConfigError("angle grid leaves [-90, 90] degrees");
    if (k > 0 && angle_grid[k] <= angle_grid[k - 1])
      throw ConfigError("angle grid must be strictly ascending");
  }
  const double dists[] = {distances.ab, distances.ai, distances.ae,
                          distances.ib, distances.ie};
  for (double d : dists)
    if (!(d > 0.0)) throw ConfigError("distances must be positive");
  if (!(hyper.c_shrink > 0.0 && hyper.c_shrink < 1.0))
    throw ConfigError("c_shrink must lie in (0,1)");
  if (!(hyper.varsigma > 1.0)) throw ConfigError("varsigma must exceed 1");
  if (!(hyper.rho0 > 0.0 && hyper.kappa0 > 0.0 && hyper.eps_inner > 0.0 &&
        hyper.eps_stop > 0.0 && hyper.penalty_target > 0.0))
    throw ConfigError("all tolerances must be positive");
  if (hyper.max_inner_iters < 1 || hyper.max_outer_iters < 1 ||
      hyper.max_penalty_rounds < 1)
    throw ConfigError("iteration caps must be at least 1");
  if (targets.empty()) throw ConfigError("desired beampattern has no targets");
  for (const BeamTarget& t : targets)
    if (t.width < 0.0) throw ConfigError("target width must be nonnegative");
}

// ---------------------------------------------------------------------------
// Randomness. Every random matrix draws from its own mt19937_64 seeded via
// SplitMix64 on (seed, stream tag), so each matrix is reproducible no matter
// in which order the set is generated. Stream tags: channels ab=0, ai=1,
// ae=2, ib=3, ie=4; solver initialization uses 16 (analog phases) and
// 17 (reference precoder). Matrix entries are drawn column-major, real part
// before imaginary part.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t tag) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(tag)));
}

namespace stream_tag {
inline constexpr std::uint64_t h_ab = 0;
inline constexpr std::uint64_t h_ai = 1;
inline constexpr std::uint64_t h_ae = 2;
inline constexpr std::uint64_t h_ib = 3;
inline constexpr std::uint64_t h_ie = 4;
inline constexpr std::uint64_t init_analog = 16;
inline constexpr std::uint64_t init_precoder = 17;
}  // namespace stream_tag

// i.i.d. circularly-symmetric complex Gaussian entries of unit variance:
// (x + jy)/sqrt(2) with x, y standard normal.
inline CMatrix complex_gaussian(std::mt19937_64& rng, Eigen::Index rows,
                                Eigen::Index cols) {
  std::normal_distribution<double> n01(0.0, 1.0);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = n01(rng);
      const double im = n01(rng);
      m(i, j) = cxd(re * inv_sqrt2, im * inv_sqrt2);
    }
  return m;
}

inline double pathloss_linear(const SystemConfig& cfg, double distance_m) {
  return std::pow(10.0, cfg.pathloss_ref_db / 10.0) *
         std::pow(distance_m, -cfg.pathloss_exponent);
}

struct ChannelSet {
  CMatrix h_ab;  // N_b x N_t
  CMatrix h_ae;  // N_e x N_t
  CMatrix h_ai;  // N_i x N_t
  CMatrix h_ib;  // N_b x N_i
  CMatrix h_ie;  // N_e x N_i
};

inline ChannelSet generate_channels(const SystemConfig& cfg,
                                    std::uint64_t seed) {
  cfg.validate();
  auto draw = [&](Eigen::Index rows, Eigen::Index cols, std::uint64_t tag,
                  double dist) {
    std::mt19937_64 rng = substream(seed, tag);
    return std::sqrt(pathloss_linear(cfg, dist)) *
           complex_gaussian(rng, rows, cols);
  };
  ChannelSet ch;
  ch.h_ab = draw(cfg.n_bob, cfg.n_tx, stream_tag::h_ab, cfg.distances.ab);
  ch.h_ai = draw(cfg.n_irs, cfg.n_tx, stream_tag::h_ai, cfg.distances.ai);
  ch.h_ae = draw(cfg.n_eve, cfg.n_tx, stream_tag::h_ae, cfg.distances.ae);
  ch.h_ib = draw(cfg.n_bob, cfg.n_irs, stream_tag::h_ib, cfg.distances.ib);
  ch.h_ie = draw(cfg.n_eve, cfg.n_irs, stream_tag::h_ie, cfg.distances.ie);
  if (!cfg.irs_enabled) {
    ch.h_ai.setZero();
    ch.h_ib.setZero();
    ch.h_ie.setZero();
  }
  return ch;
}

// ULA steering vector: entry m (0-based) is exp(j*pi*m*sin(theta)).
inline CVector steering_vector(double theta, int n) {
  if (n < 1) throw DimensionError("steering_vector: need at least one antenna");
  CVector a(n);
  const double s = std::sin(theta);
  for (int m = 0; m < n; ++m)
    a(m) = std::polar(1.0, std::numbers::pi * m * s);
  return a;
}

struct DesiredBeampattern {
  std::vector<BeamTarget> targets;
  std::vector<double> grid;  // radians, copy of the sampling grid
  RVector values;            // indicator per grid angle
};

inline DesiredBeampattern desired_beampattern(
    const std::vector<BeamTarget>& targets, const std::vector<double>& grid) {
  if (targets.empty()) throw ConfigError("desired beampattern has no targets");
  if (grid.empty()) throw ConfigError("angle grid is empty");
  constexpr double half_pi = std::numbers::pi / 2.0;
  for (size_t k = 0; k < grid.size(); ++k) {
    if (grid[k] < -half_pi - 1e-9 || grid[k] > half_pi + 1e-9)
      throw ConfigError("angle grid leaves [-90, 90] degrees");
    if (k > 0 && grid[k] <= grid[k - 1])
      throw ConfigError("angle grid must be strictly ascending");
  }
  DesiredBeampattern out;
  out.targets = targets;
  out.grid = grid;
  out.values = RVector::Zero(static_cast<Eigen::Index>(grid.size()));
  for (size_t k = 0; k < grid.size(); ++k) {
    for (const BeamTarget& t : targets) {
      // Grid points landing exactly on a plateau edge count as inside; the
      // tolerance absorbs rounding in degree-to-radian conversion.
      if (grid[k] >= t.center - 0.5 * t.width - 1e-12 &&
          grid[k] <= t.center + 0.5 * t.width + 1e-12) {
        out.values(static_cast<Eigen::Index>(k)) = 1.0;
        break;
      }
    }
  }
  return out;
}

inline DesiredBeampattern desired_beampattern(const SystemConfig& cfg) {
  return desired_beampattern(cfg.targets, cfg.angle_grid);
}

// ---------------------------------------------------------------------------
// Configuration files: flat "key = value" text, one pair per line, '#' for
// comments. Keys are the SystemConfig field names in snake_case; nested
// fields are dotted (distances.ab, hyper.rho0). Angles are given in degrees
// through *_deg keys. Unknown and duplicate keys are rejected.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse number '" +
                      value + "'");
  }
}

inline int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  const int i = static_cast<int>(std::lround(v));
  if (std::abs(v - i) > 1e-9)
    throw ConfigError("config key '" + key + "': expected an integer, got '" +
                      value + "'");
  return i;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" +
                    value + "'");
}

inline std::vector<double> parse_double_list(const std::string& key,
                                             const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw ConfigError("config key '" + key + "': empty list element");
    out.push_back(parse_double(key, item));
  }
  if (out.empty())
    throw ConfigError("config key '" + key + "': empty list");
  return out;
}

}  // namespace detail

inline SystemConfig parse_config_text(const std::string& text) {
  SystemConfig cfg = SystemConfig::defaults();
  double angle_min_deg = -90.0, angle_max_deg = 90.0, angle_step_deg = 1.0;
  bool grid_from_bounds = false;
  std::vector<double> grid_deg;
  std::vector<double> center_deg, width_deg;
  std::set<std::string> seen;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key or value");
    if (!seen.insert(key).second)
      throw ConfigError("config key '" + key + "' given twice");

    if (key == "n_tx") cfg.n_tx = detail::parse_int(key, value);
    else if (key == "n_rf") cfg.n_rf = detail::parse_int(key, value);
    else if (key == "n_streams") cfg.n_streams = detail::parse_int(key, value);
    else if (key == "n_irs") cfg.n_irs = detail::parse_int(key, value);
    else if (key == "n_bob") cfg.n_bob = detail::parse_int(key, value);
    else if (key == "n_eve") cfg.n_eve = detail::parse_int(key, value);
    else if (key == "p_max") cfg.p_max = detail::parse_double(key, value);
    else if (key == "mu") cfg.mu = detail::parse_double(key, value);
    else if (key == "irs_enabled") cfg.irs_enabled = detail::parse_bool(key, value);
    else if (key == "distances.ab") cfg.distances.ab = detail::parse_double(key, value);
    else if (key == "distances.ai") cfg.distances.ai = detail::parse_double(key, value);
    else if (key == "distances.ae") cfg.distances.ae = detail::parse_double(key, value);
    else if (key == "distances.ib") cfg.distances.ib = detail::parse_double(key, value);
    else if (key == "distances.ie") cfg.distances.ie = detail::parse_double(key, value);
    else if (key == "pathloss_ref_db") cfg.pathloss_ref_db = detail::parse_double(key, value);
    else if (key == "pathloss_exponent") cfg.pathloss_exponent = detail::parse_double(key, value);
    else if (key == "hyper.varsigma") cfg.hyper.varsigma = detail::parse_double(key, value);
    else if (key == "hyper.rho0") cfg.hyper.rho0 = detail::parse_double(key, value);
    else if (key == "hyper.kappa0") cfg.hyper.kappa0 = detail::parse_double(key, value);
    else if (key == "hyper.eps_inner") cfg.hyper.eps_inner = detail::parse_double(key, value);
    else if (key == "hyper.eps_stop") cfg.hyper.eps_stop = detail::parse_double(key, value);
    else if (key == "hyper.c_shrink") cfg.hyper.c_shrink = detail::parse_double(key, value);
    else if (key == "hyper.max_inner_iters") cfg.hyper.max_inner_iters = detail::parse_int(key, value);
    else if (key == "hyper.max_outer_iters") cfg.hyper.max_outer_iters = detail::parse_int(key, value);
    else if (key == "hyper.max_penalty_rounds") cfg.hyper.max_penalty_rounds = detail::parse_int(key, value);
    else if (key == "hyper.penalty_target") cfg.hyper.penalty_target = detail::parse_double(key, value);
    else if (key == "angle_min_deg") { angle_min_deg = detail::parse_double(key, value); grid_from_bounds = true; }
    else if (key == "angle_max_deg") { angle_max_deg = detail::parse_double(key, value); grid_from_bounds = true; }
    else if (key == "angle_step_deg") { angle_step_deg = detail::parse_double(key, value); grid_from_bounds = true; }
    else if (key == "angle_grid_deg") grid_deg = detail::parse_double_list(key, value);
    else if (key == "target_center_deg") center_deg = detail::parse_double_list(key, value);
    else if (key == "target_width_deg") width_deg = detail::parse_double_list(key, value);
    else if (key == "penalty_mode") {
      if (value == "fixed_weight") cfg.penalty_mode = PenaltyMode::fixed_weight;
      else if (value == "escalating") cfg.penalty_mode = PenaltyMode::escalating;
      else throw ConfigError("config key 'penalty_mode': expected fixed_weight or escalating");
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }

  if (!grid_deg.empty() && grid_from_bounds)
    throw ConfigError("give either angle_grid_deg or angle bounds, not both");
  if (!grid_deg.empty()) {
    cfg.angle_grid.clear();
    for (double d : grid_deg) cfg.angle_grid.push_back(d * kDegToRad);
  } else if (grid_from_bounds) {
    cfg.angle_grid = make_angle_grid(angle_min_deg, angle_max_deg, angle_step_deg);
  }

  if (!center_deg.empty() || !width_deg.empty()) {
    if (center_deg.empty())
      throw ConfigError("target_width_deg given without target_center_deg");
    if (width_deg.empty())
      throw ConfigError("target_center_deg given without target_width_deg");
    if (width_deg.size() != 1 && width_deg.size() != center_deg.size())
      throw ConfigError("target_width_deg must have one entry or one per center");
    cfg.targets.clear();
    for (size_t i = 0; i < center_deg.size(); ++i) {
      const double w = width_deg.size() == 1 ? width_deg[0] : width_deg[i];
      cfg.targets.push_back({center_deg[i] * kDegToRad, w * kDegToRad});
    }
  }

  cfg.validate();
  return cfg;
}

inline SystemConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace isac
