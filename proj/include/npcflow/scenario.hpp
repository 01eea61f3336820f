#pragma once

// Scenario configuration and execution: builds initial data, runs the
// requested flows, applies the requested checks, and writes traces,
// diagnostics, reports and a manifest into one output directory.

#include "npcflow/io.hpp"
#include "npcflow/presets.hpp"

#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace npcflow {

/// Invalid configuration; the message starts with the offending field path.
class ConfigError : public std::invalid_argument {
public:
  ConfigError(const std::string& path, const std::string& msg)
      : std::invalid_argument(path + ": " + msg), path(path)
  {
  }
  std::string path;
};

struct SolverBlock {
  double tau = 0.005;
  int steps = 100;
  SweepOrder order = SweepOrder::lexicographic;
  double tolerance = 1e-12;
  int max_sweeps = 200000;
};

struct WedBlock {
  /// One entry for a single solve; several for an eps sweep (descending).
  std::vector<double> eps_list;
  /// Default: min(eps_list) / 4.
  double dt = 0.0;
  /// Default per eps: t_compare + 10 eps.
  double T = 0.0;
  double t_compare = 0.5;
  double tolerance = 1e-9;
  int max_sweeps = 2000000;
  WedQuadrature quadrature = WedQuadrature::midpoint;

  double effective_dt() const;
  double effective_T(double eps) const;
};

struct FamilyConfig {
  int space_stride = 4;
  int time_stride = 4;
  std::vector<int> space_radii{4, 8};
  std::vector<int> time_radii{4, 8};

  std::vector<BumpRadius> radii() const;
};

struct VerifyBlock {
  std::vector<std::string> checks;
  FamilyConfig family;
  double weak_tolerance = 5e-2;
  int pair_delta = 1;
  /// Zeroth-order constant added to the gradient audits; 0 on flat grids.
  double curvature_constant = 0.0;
  double evi_tolerance = 1e-8;
  double dissipation_tolerance = 1e-9;
  double contraction_tolerance = 1e-9;
  /// Empty: six radii spread over [4h, sqrt(t0)/2], clipped to the kernel collar.
  std::vector<double> frequency_radii;
  int frequency_node_stride = 8;
  /// Explicit base nodes; overrides the stride when nonempty.
  std::vector<std::size_t> frequency_nodes;
  double frequency_tolerance = 5e-2;
  std::vector<double> scan_radii{0.4, 0.2, 0.1};
  double scan_time = 0.5;
  int scan_node_stride = 8;
  double ratio_limit = 4.0;
  double oracle_tolerance = 1e-7;
};

struct ScenarioConfig {
  int n = 1;
  int N = 64;
  double L = 4.0;
  TargetSpace space = TargetSpace::euclidean(1);
  PresetParams initial;
  /// Explicit preset seed; otherwise the scenario seed is used.
  std::optional<std::uint64_t> initial_seed;
  std::optional<SolverBlock> solver;
  std::optional<WedBlock> wed;
  VerifyBlock verify;
  std::string output = "out";
  std::uint64_t seed = 1;
  bool oracle = false;

  Grid grid() const { return Grid(n, N, L); }
  PresetParams preset() const;
  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// Every check name accepted in verify.checks.
const std::vector<std::string>& known_checks();

/// Strict parse: unknown keys and wrong types are errors with field paths.
ScenarioConfig parse_config(const Json& j);
ScenarioConfig load_config(const std::filesystem::path& path);
/// Normalized form with all defaults filled in; parse_config inverts it.
Json config_to_json(const ScenarioConfig& c);

struct ScenarioOutcome {
  int exit_code = 0;
  std::vector<VerifierReport> reports;
  std::vector<std::string> errors;
  std::vector<std::string> files;
};

struct RunOptions {
  /// Run exactly these checks instead of verify.checks (empty: none).
  std::optional<std::vector<std::string>> only;
  bool write_flow = true;
  bool write_wed = true;
};

/// Runs flows and checks, writes artifacts under config.output.  Exit code
/// 0 iff every check passed and every solve converged.
ScenarioOutcome run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

} // namespace npcflow
