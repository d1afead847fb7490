// Command-line front end for the experiment harness.
//
//   isacsim run --spec <file> [--out <dir>] [--threads N] [--seed-base S]
//   isacsim beampattern --config <file> --variant <name> --seed S --out <file>
//   isacsim fig3 --out <file>
//   isacsim trace --config <file> --seed S --out <file> [--variant <name>]
//   isacsim --version | --help
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error. Failures print a
// single machine-readable JSON line to stderr: {"error": "<message>"}.
// The env var ISAC_THREADS overrides --threads when set.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "isac/harness.hpp"
#include "isac/version.hpp"

namespace {

constexpr const char* kUsage = R"(usage:
  isacsim run --spec <file> [--out <dir>] [--threads N] [--seed-base S]
  isacsim beampattern --config <file> --variant <name> --seed S --out <file>
  isacsim fig3 --out <file>
  isacsim trace --config <file> --seed S --out <file> [--variant <name>]
  isacsim --version

run          execute a Monte Carlo experiment spec, write CSVs and manifest
beampattern  solve one instance and write (theta_deg, p_b, delta_p_d) rows
fig3         write the secrecy gap versus rate reference sweeps
trace        solve one instance and write its per-cycle convergence trace

ISAC_THREADS overrides --threads when set.
)";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flag parser for "--name value" pairs; every subcommand uses the same shape.
class Args {
 public:
  Args(int argc, char** argv, int first,
       const std::vector<std::string>& known) {
    for (int i = first; i < argc; ++i) {
      const std::string flag = argv[i];
      bool ok = false;
      for (const std::string& k : known) ok = ok || k == flag;
      if (!ok) throw UsageError("unknown flag '" + flag + "'");
      if (i + 1 >= argc) throw UsageError("flag '" + flag + "' needs a value");
      if (!values_.emplace(flag, argv[i + 1]).second)
        throw UsageError("flag '" + flag + "' given twice");
      ++i;
    }
  }

  std::string require(const std::string& flag) const {
    const auto it = values_.find(flag);
    if (it == values_.end()) throw UsageError("missing required " + flag);
    return it->second;
  }

  std::optional<std::string> get(const std::string& flag) const {
    const auto it = values_.find(flag);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<std::string, std::string> values_;
};

std::uint64_t parse_seed(const std::string& text) {
  try {
    size_t pos = 0;
    const unsigned long long v = std::stoull(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError("cannot parse seed '" + text + "'");
  }
}

int parse_threads(const std::optional<std::string>& flag_value) {
  std::string text;
  if (const char* env = std::getenv("ISAC_THREADS"); env && *env)
    text = env;  // environment wins over the flag
  else if (flag_value)
    text = *flag_value;
  else
    return 0;  // harness default: hardware concurrency
  try {
    size_t pos = 0;
    const int v = std::stoi(text, &pos);
    if (pos != text.size() || v < 1) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError("cannot parse thread count '" + text + "'");
  }
}

int cmd_run(int argc, char** argv) {
  const Args args(argc, argv, 2, {"--spec", "--out", "--threads",
                                  "--seed-base"});
  isac::ExperimentSpec spec = isac::ExperimentSpec::load(args.require("--spec"));
  if (const auto out = args.get("--out")) spec.outputs = *out;
  if (spec.outputs.empty())
    throw UsageError("no output directory: give --out or set outputs in the spec");
  if (const auto sb = args.get("--seed-base")) spec.seed_base = parse_seed(*sb);

  const isac::ExperimentResult result =
      isac::run_experiment(spec, parse_threads(args.get("--threads")));
  isac::write_experiment(result, spec.outputs);

  int n_converged = 0;
  for (const isac::TrialRecord& r : result.records)
    if (r.converged) ++n_converged;
  std::cout << "wrote " << result.records.size() << " records ("
            << n_converged << " converged) to " << spec.outputs << "\n";
  return 0;
}

int cmd_beampattern(int argc, char** argv) {
  const Args args(argc, argv, 2, {"--config", "--variant", "--seed", "--out"});
  const isac::SystemConfig base =
      isac::load_config_file(args.require("--config"));
  const isac::ArchitectureVariant variant =
      isac::variant_from_string(args.require("--variant"));
  const std::uint64_t seed = parse_seed(args.require("--seed"));

  const isac::SolveReport report = isac::solve_variant(variant, base, seed);
  if (!report.converged)
    std::cerr << "warning: solve did not reach the stopping tolerance\n";
  isac::emit_beampattern(report, isac::desired_beampattern(base),
                         args.require("--out"));
  std::cout << "wrote " << args.require("--out") << "\n";
  return 0;
}

int cmd_fig3(int argc, char** argv) {
  const Args args(argc, argv, 2, {"--out"});
  isac::emit_fig3_sweep(isac::default_fig3_sweeps(), args.require("--out"));
  std::cout << "wrote " << args.require("--out") << "\n";
  return 0;
}

int cmd_trace(int argc, char** argv) {
  const Args args(argc, argv, 2, {"--config", "--variant", "--seed", "--out"});
  const isac::SystemConfig base =
      isac::load_config_file(args.require("--config"));
  const isac::ArchitectureVariant variant = isac::variant_from_string(
      args.get("--variant").value_or("proposed_hb"));
  const std::uint64_t seed = parse_seed(args.require("--seed"));

  const isac::SolveReport report = isac::solve_variant(variant, base, seed);
  if (!report.converged)
    std::cerr << "warning: solve did not reach the stopping tolerance\n";
  isac::emit_trace(report, args.require("--out"));
  std::cout << "wrote " << args.require("--out") << "\n";
  return 0;
}

int dispatch(int argc, char** argv) {
  if (argc < 2) throw UsageError("no subcommand");
  const std::string cmd = argv[1];
  if (cmd == "--help" || cmd == "-h" || cmd == "help") {
    std::cout << kUsage;
    return 0;
  }
  if (cmd == "--version") {
    std::cout << "isacsim " << isac::kVersion << "\n";
    return 0;
  }
  if (cmd == "run") return cmd_run(argc, argv);
  if (cmd == "beampattern") return cmd_beampattern(argc, argv);
  if (cmd == "fig3") return cmd_fig3(argc, argv);
  if (cmd == "trace") return cmd_trace(argc, argv);
  throw UsageError("unknown subcommand '" + cmd + "'");
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "{\"error\": \"" << isac::detail::json_escape(e.what())
              << "\"}\n";
    std::cerr << kUsage;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "{\"error\": \"" << isac::detail::json_escape(e.what())
              << "\"}\n";
    return 1;
  }
}
