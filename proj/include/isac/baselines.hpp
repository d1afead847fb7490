#pragma once
// Comparison architectures for the experiment figures, each expressed as a
// declarative transform of the base configuration plus solver options. No
// variant owns its own solver: a fully digital front end is the same PDD
// machinery with the analog network pinned to an identity (held fixed, the
// digital stage absorbs all precoding, and since that analog matrix is
// square and full rank the product spans every precoder the digital-only
// architecture could form); surface-free variants zero the reflecting-path
// channels and hold the reflection phases; communication-only variants set
// the trade-off weight to 1 and hold the distortion scale; the radar-only
// variant sets it to 0.

#include <string>
#include <string_view>
#include <vector>

#include "isac/solver.hpp"

namespace isac {

enum class ArchitectureVariant {
  proposed_hb,      // hybrid beamforming, surface assisted, joint objective
  irs_isac_fdb,     // fully digital, surface assisted, joint objective
  woirs_isac_fdb,   // fully digital, no surface, joint objective
  irs_c_hb,         // hybrid, surface assisted, communication-only (mu = 1)
  woirs_c_hb,       // hybrid, no surface, communication-only
  woirs_c_fdb,      // fully digital, no surface, communication-only
  radar_only,       // hybrid, sensing-only objective (mu = 0)
  subconnected_hb,  // hybrid with block-diagonal analog network
};

inline const std::vector<ArchitectureVariant>& all_variants() {
  static const std::vector<ArchitectureVariant> v = {
      ArchitectureVariant::proposed_hb,    ArchitectureVariant::irs_isac_fdb,
      ArchitectureVariant::woirs_isac_fdb, ArchitectureVariant::irs_c_hb,
      ArchitectureVariant::woirs_c_hb,     ArchitectureVariant::woirs_c_fdb,
      ArchitectureVariant::radar_only,     ArchitectureVariant::subconnected_hb,
  };
  return v;
}

inline std::string_view to_string(ArchitectureVariant v) {
  switch (v) {
    case ArchitectureVariant::proposed_hb: return "proposed_hb";
    case ArchitectureVariant::irs_isac_fdb: return "irs_isac_fdb";
    case ArchitectureVariant::woirs_isac_fdb: return "woirs_isac_fdb";
    case ArchitectureVariant::irs_c_hb: return "irs_c_hb";
    case ArchitectureVariant::woirs_c_hb: return "woirs_c_hb";
    case ArchitectureVariant::woirs_c_fdb: return "woirs_c_fdb";
    case ArchitectureVariant::radar_only: return "radar_only";
    case ArchitectureVariant::subconnected_hb: return "subconnected_hb";
  }
  throw ConfigError("unknown architecture variant value");
}

inline ArchitectureVariant variant_from_string(std::string_view name) {
  for (ArchitectureVariant v : all_variants())
    if (to_string(v) == name) return v;
  throw ConfigError("unknown architecture variant: " + std::string(name));
}

struct MaterializedVariant {
  SystemConfig cfg;
  SolverOptions opts;
};

inline MaterializedVariant materialize_variant(ArchitectureVariant v,
                                               const SystemConfig& base) {
  base.validate();
  MaterializedVariant m;
  m.cfg = base;

  const auto fully_digital = [&] {
    m.cfg.n_rf = m.cfg.n_tx;
    m.opts.skip_analog = true;
    m.opts.fixed_analog = CMatrix::Identity(m.cfg.n_tx, m.cfg.n_tx);
  };
  const auto no_surface = [&] {
    m.cfg.irs_enabled = false;
    m.opts.skip_phi = true;
  };
  const auto comm_only = [&] {
    m.cfg.mu = 1.0;
    m.opts.skip_delta = true;
  };

  switch (v) {
    case ArchitectureVariant::proposed_hb:
      break;
    case ArchitectureVariant::irs_isac_fdb:
      fully_digital();
      break;
    case ArchitectureVariant::woirs_isac_fdb:
      fully_digital();
      no_surface();
      break;
    case ArchitectureVariant::irs_c_hb:
      comm_only();
      break;
    case ArchitectureVariant::woirs_c_hb:
      comm_only();
      no_surface();
      break;
    case ArchitectureVariant::woirs_c_fdb:
      fully_digital();
      no_surface();
      comm_only();
      break;
    case ArchitectureVariant::radar_only:
      m.cfg.mu = 0.0;
      break;
    case ArchitectureVariant::subconnected_hb:
      if (m.cfg.n_tx % m.cfg.n_rf != 0)
        throw ConfigError(
            "subconnected_hb: transmit antennas not divisible by RF chains");
      m.opts.subconnected = true;
      break;
  }
  m.cfg.validate();
  return m;
}

// Convenience: generate channels, initialize, and solve one variant.
inline SolveReport solve_variant(ArchitectureVariant v,
                                 const SystemConfig& base,
                                 std::uint64_t seed) {
  const MaterializedVariant m = materialize_variant(v, base);
  const ChannelSet ch = generate_channels(m.cfg, seed);
  const DesiredBeampattern desired = desired_beampattern(m.cfg);
  return exterior_penalty(ch, desired, m.cfg, seed, m.opts);
}

}  // namespace isac
