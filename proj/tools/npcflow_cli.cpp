// npcflow command line: runs scenarios, audits and replays.

#include "npcflow/scenario.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>

using namespace npcflow;

namespace {

// Flag values that override the config file when given.
struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> space;
  std::optional<std::string> preset;
  std::optional<int> n, N;
  std::optional<double> L, tau, dt, T, tolerance, amplitude;
  std::optional<int> steps;
  std::optional<std::string> order;
  std::vector<double> eps;
  std::optional<std::string> quadrature;
  std::vector<std::string> checks;
  bool oracle = false;
};

void add_common(CLI::App* app, Overrides& o)
{
  app->add_option("--config", o.config, "JSON scenario file")->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "scenario seed (overrides the config)");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--space", o.space, "euclidean:DIM | spider:K | hyperbolic2");
  app->add_option("--preset", o.preset, "constant | linear_core | two_ray_step | three_ray_symmetric | random_smooth");
  app->add_option("--amplitude", o.amplitude, "preset amplitude");
  app->add_option("--n", o.n, "domain dimension (1 or 2)");
  app->add_option("--N", o.N, "nodes per axis");
  app->add_option("--L", o.L, "torus side length");
  app->add_option("--tau", o.tau, "proximal time step");
  app->add_option("--steps", o.steps, "number of proximal steps");
  app->add_option("--order", o.order, "lexicographic | red_black | seeded_random");
  app->add_option("--eps", o.eps, "WED eps (several values for a sweep)");
  app->add_option("--dt", o.dt, "WED time step");
  app->add_option("--T", o.T, "WED horizon");
  app->add_option("--quadrature", o.quadrature, "WED kinetic weight: midpoint | left_endpoint");
  app->add_option("--tolerance", o.tolerance, "sweep stopping tolerance of the active solver");
  app->add_flag("--oracle", o.oracle, "compare with the dense linear oracle (Euclidean targets)");
}

TargetSpace parse_space_flag(const std::string& s)
{
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  const auto arg = [&]() {
    if (colon == std::string::npos) throw ConfigError("space", "'" + kind + "' needs a parameter, e.g. " + kind + ":3");
    try {
      return std::stoi(s.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("space", "bad parameter in '" + s + "'");
    }
  };
  try {
    if (kind == "euclidean") return TargetSpace::euclidean(arg());
    if (kind == "spider") return TargetSpace::spider(arg());
    if (kind == "hyperbolic2") return TargetSpace::hyperbolic2();
  } catch (const DomainError& e) {
    throw ConfigError("space", e.what());
  }
  throw ConfigError("space", "unknown space '" + s + "'");
}

enum class Mode { flow, wed };

ScenarioConfig build_config(const Overrides& o, std::optional<Mode> mode)
{
  // Parsing the normalized JSON applies the same strict checks as a file.
  Json j = o.config.empty() ? config_to_json(ScenarioConfig{}) : Json::parse(read_file(o.config));
  // the default skeleton has neither solver nor wed block
  if (!j.contains("solver") && !j.contains("wed")) j["solver"] = Json::object();
  ScenarioConfig c = parse_config(j);
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.output = *o.out;
  if (o.space) c.space = parse_space_flag(*o.space);
  if (o.preset) {
    try {
      c.initial.kind = parse_preset(*o.preset);
    } catch (const DomainError& e) {
      throw ConfigError("initial.preset", e.what());
    }
  }
  if (o.amplitude) c.initial.amplitude = *o.amplitude;
  if (o.n) c.n = *o.n;
  if (o.N) c.N = *o.N;
  if (o.L) c.L = *o.L;
  const bool flow_flags = o.tau || o.steps || o.order;
  const bool wed_flags = !o.eps.empty() || o.dt || o.T || o.quadrature;
  if ((flow_flags || mode == Mode::flow) && !c.solver) c.solver = SolverBlock{};
  if ((wed_flags || mode == Mode::wed) && !c.wed) {
    c.wed = WedBlock{};
    c.wed->eps_list = {0.1};
  }
  if (o.tau) c.solver->tau = *o.tau;
  if (o.steps) c.solver->steps = *o.steps;
  if (o.order) {
    try {
      c.solver->order = parse_sweep_order(*o.order);
    } catch (const DomainError& e) {
      throw ConfigError("solver.order", e.what());
    }
  }
  if (!o.eps.empty()) c.wed->eps_list = o.eps;
  if (o.dt) c.wed->dt = *o.dt;
  if (o.T) c.wed->T = *o.T;
  if (o.quadrature) {
    try {
      c.wed->quadrature = parse_wed_quadrature(*o.quadrature);
    } catch (const DomainError& e) {
      throw ConfigError("wed.quadrature", e.what());
    }
  }
  if (o.tolerance) {
    if (mode == Mode::wed && c.wed) c.wed->tolerance = *o.tolerance;
    else if (c.solver) c.solver->tolerance = *o.tolerance;
    else c.wed->tolerance = *o.tolerance;
  }
  if (o.oracle) c.oracle = true;
  c.validate();
  return c;
}

int report(const ScenarioOutcome& r, const std::string& dir)
{
  std::cout << std::setprecision(6);
  for (const auto& rep : r.reports) {
    std::cout << (rep.pass ? "PASS " : "FAIL ") << rep.id << "  worst=" << rep.worst_value
              << "  tol=" << rep.tolerance;
    if (!rep.location.empty()) std::cout << "  at " << rep.location;
    std::cout << "\n";
    if (!rep.note.empty()) std::cout << "     " << rep.note << "\n";
  }
  for (const auto& e : r.errors) std::cout << "ERROR " << e << "\n";
  std::cout << "artifacts: " << dir << " (" << r.files.size() << " files)\n";
  return r.exit_code;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"npcflow: harmonic map heat flow into NPC targets"};
  app.require_subcommand(1);

  Overrides o;
  std::string trace_path;

  auto* simulate = app.add_subcommand("simulate", "run the minimizing-movement flow and write its trace");
  auto* wed = app.add_subcommand("wed", "minimize the weighted energy-dissipation functional");
  auto* verify = app.add_subcommand("verify", "run the flow, WED and the configured checks");
  auto* frequency = app.add_subcommand("frequency", "frequency profile audit on the flow");
  auto* scan = app.add_subcommand("scan-lipschitz", "Lipschitz and Harnack scaling scans");
  auto* sweep = app.add_subcommand("sweep", "eps sweep of WED minimizers against the flow");
  auto* replay_cmd = app.add_subcommand("replay", "recompute diagnostics of a stored trace and compare");
  for (auto* s : {simulate, wed, verify, frequency, scan, sweep}) add_common(s, o);
  verify->add_option("--checks", o.checks, "restrict to these checks");
  replay_cmd->add_option("trace", trace_path, "trace.ndjson or wed.ndjson")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (replay_cmd->parsed()) {
      const ReplayResult r = replay_file(trace_path);
      std::cout << "schema " << r.header.schema << " v" << r.header.schema_version << ", producer '"
                << r.header.producer << "', " << r.header.type << ", " << r.slices << " slices\n";
      for (const auto& d : r.diffs) std::cout << "DIFF " << d << "\n";
      std::cout << (r.match ? "MATCH" : "MISMATCH") << "\n";
      return r.match ? 0 : 1;
    }

    RunOptions run;
    std::optional<Mode> mode;
    if (simulate->parsed()) {
      mode = Mode::flow;
      run.write_wed = false;
      run.only = std::vector<std::string>{};
    } else if (wed->parsed()) {
      mode = Mode::wed;
      run.write_flow = false;
      run.only = std::vector<std::string>{"wed_energy_bound"};
    } else if (verify->parsed()) {
      if (!o.checks.empty()) run.only = o.checks;
    } else if (frequency->parsed()) {
      mode = Mode::flow;
      run.write_wed = false;
      run.only = std::vector<std::string>{"frequency"};
    } else if (scan->parsed()) {
      mode = Mode::flow;
      run.write_wed = false;
      run.only = std::vector<std::string>{"lipschitz", "harnack"};
    } else if (sweep->parsed()) {
      mode = Mode::wed;
      run.write_flow = false;
      run.write_wed = false;
      run.only = std::vector<std::string>{"wed_convergence"};
    }
    ScenarioConfig c = build_config(o, mode);
    if (sweep->parsed() && c.wed->eps_list.size() < 2 && o.eps.empty())
      c.wed->eps_list = {0.2, 0.1, 0.05, 0.025};
    // simulate ignores wed blocks of the config and vice versa
    if (simulate->parsed() || frequency->parsed()) c.wed.reset();
    if (wed->parsed() || sweep->parsed()) {
      c.solver.reset();
      c.oracle = false;
    }
    return report(run_scenario(c, run), c.output);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 2;
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
