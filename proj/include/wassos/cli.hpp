#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace wassos {

inline constexpr const char* kVersion = "0.1.0";

/// Stable process exit codes.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitSolver = 2, kExitIo = 3 };

/// Everything a command needs. Unset optionals fall back to the preset or
/// model defaults.
struct RunConfig {
  std::string preset;
  std::string model;
  std::optional<std::string> hierarchy;
  std::optional<int> r;
  std::optional<int> r_max;
  std::optional<double> eps;
  std::optional<std::string> eps_grid;  // "lo:hi:n", log spaced
  std::optional<int> reps;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  int jobs = 1;
  bool export_only = false;
  std::string out;
  std::optional<int> grid;
  bool svg = false;
};

/// Reads a JSON config whose keys mirror the long flag names.
RunConfig parse_config_json(const std::string& text);
/// Fields set in `flags` replace those in `base`.
RunConfig merge_config(const RunConfig& base, const RunConfig& flags);
/// FNV-1a hash of the canonical config rendering, as 16 hex digits.
std::string config_hash(const RunConfig& config);
/// Tolerance from the config, else WASSOS_SOLVER_TOL, else the solver default.
double resolve_tol(const RunConfig& config);
/// Parses "lo:hi:n" into n log-spaced radii.
std::vector<double> parse_eps_grid(const std::string& text);

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_oracle(const RunConfig& config, std::ostream& out, std::ostream& err);
/// Dimension counts (and, unless export-only, timings) over a scalability grid.
int cmd_scale(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full command-line entry point.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wassos
