#include "npcflow/scenario.hpp"

#include "npcflow/oracles.hpp"
#include "npcflow/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace npcflow {

namespace {

namespace fs = std::filesystem;

bool is_artifact(const std::string& name)
{
  static const std::set<std::string> fixed{"trace.ndjson",   "diagnostics.csv", "density_final.csv", "wed.ndjson",
                                           "wed_diagnostics.csv", "summary.csv", "config.json",       "manifest.json"};
  if (fixed.count(name)) return true;
  return name.rfind("report_", 0) == 0 && name.size() > 12 && name.substr(name.size() - 5) == ".json";
}

// Old artifacts would otherwise leak into the manifest of a rerun.
void clear_artifacts(const fs::path& dir)
{
  if (!fs::exists(dir)) return;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && is_artifact(e.path().filename().string())) fs::remove(e.path());
}

template <class Writer> std::string render(Writer&& w)
{
  std::ostringstream os;
  w(os);
  return os.str();
}

SolverOptions solver_options(const ScenarioConfig& c)
{
  SolverOptions o;
  if (c.solver) {
    o.order = c.solver->order;
    o.tolerance = c.solver->tolerance;
    o.max_sweeps = c.solver->max_sweeps;
  }
  o.seed = c.seed;
  return o;
}

WedOptions wed_options(const ScenarioConfig& c)
{
  WedOptions o;
  o.solver = solver_options(c);
  if (c.wed) {
    o.solver.tolerance = c.wed->tolerance;
    o.solver.max_sweeps = c.wed->max_sweeps;
    o.quadrature = c.wed->quadrature;
  } else {
    o.solver.tolerance = 1e-9;
    o.solver.max_sweeps = 2000000;
  }
  return o;
}

std::vector<std::size_t> strided_nodes(const Grid& g, int stride)
{
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x < g.size(); ++x) {
    const auto c = g.coords(x);
    bool keep = c[0] % stride == 0;
    if (g.dim() == 2) keep = keep && c[1] % stride == 0;
    if (keep) out.push_back(x);
  }
  return out;
}

std::string fmt(double v)
{
  std::ostringstream os;
  os << v;
  return os.str();
}

// Six radii spread geometrically over the resolvable range, capped where
// the kernel collar still fits.
std::vector<double> default_frequency_radii(const Grid& g, double t0)
{
  const double lo = 4.0 * g.h();
  const double hi = std::min(0.5 * std::sqrt(t0), g.length() / (12.0 * std::numbers::sqrt2));
  if (!(hi > lo)) throw DomainError("no resolvable frequency radii: need 4h < min(sqrt(t0)/2, L/(12 sqrt 2))");
  std::vector<double> out;
  for (int i = 0; i < 6; ++i) out.push_back(lo * std::pow(hi / lo, i / 5.0));
  return out;
}

VerifierReport frequency_suite(const FlowTrace& trace, const VerifyBlock& v)
{
  const Grid& g = trace.grid();
  const SliceView view = SliceView::of(trace);
  const int slice = static_cast<int>(trace.slices.size()) - 1;
  const double t0 = slice * trace.tau;
  const auto radii = v.frequency_radii.empty() ? default_frequency_radii(g, t0) : v.frequency_radii;

  VerifierReport rep;
  rep.id = "frequency";
  rep.tolerance = v.frequency_tolerance;
  rep.resolution = "n=" + std::to_string(g.dim()) + " N=" + std::to_string(g.nodes_per_axis()) + " L=" +
                   fmt(g.length()) + " tau=" + fmt(trace.tau) + " t0=" + fmt(t0);
  double worst_drop = 0.0, min_N = std::numeric_limits<double>::infinity(), max_dev1 = 0.0;
  int degenerate = 0, profiles = 0, failing = 0;
  const auto nodes = v.frequency_nodes.empty() ? strided_nodes(g, v.frequency_node_stride) : v.frequency_nodes;
  for (std::size_t x : nodes) {
    VerifierReport p;
    try {
      p = frequency_profile(view, {x, slice}, radii, v.frequency_tolerance);
    } catch (const DegenerateFrequency&) {
      ++degenerate;
      continue;
    }
    ++profiles;
    if (!p.pass) ++failing;
    for (double R : radii) {
      const double N = p.metric("N(R=" + fmt(R) + ")");
      min_N = std::min(min_N, N);
      max_dev1 = std::max(max_dev1, std::abs(N - 1.0));
    }
    if (p.worst_value < worst_drop) {
      worst_drop = p.worst_value;
      rep.location = "node " + std::to_string(x) + ", " + p.location;
    }
  }
  rep.worst_value = worst_drop;
  rep.metrics = {{"profiles", profiles},
                 {"degenerate", degenerate},
                 {"failing_profiles", failing},
                 {"min_N", profiles ? min_N : 0.0},
                 {"max_abs_N_minus_1", max_dev1},
                 {"R_min", radii.front()},
                 {"R_max", radii.back()}};
  const bool lower_ok = profiles == 0 || min_N >= 1.0 - v.frequency_tolerance;
  rep.pass = failing == 0 && lower_ok;
  if (profiles == 0) rep.note = "every base point degenerate (H = 0); nothing to audit";
  else if (!lower_ok) rep.note = "sampled N below 1 - tolerance";
  return rep;
}

VerifierReport evi_suite(const ScenarioConfig& c, const FlowTrace& trace, const GridMap& u0)
{
  const Grid g = c.grid();
  std::vector<GridMap> competitors{u0};
  Rng rng(c.seed ^ 0x5eedc0de0001ULL);
  for (int i = 0; i < 2; ++i) competitors.emplace_back(g, c.space, random_point(c.space, rng, 1.0));
  PresetParams rs = c.preset();
  rs.kind = PresetKind::random_smooth;
  for (std::uint64_t i = 0; i < 2; ++i) {
    rs.seed = c.seed * 31 + 17 + i;
    competitors.push_back(make_preset(g, c.space, rs));
  }
  return evi_residual(trace, competitors, c.verify.evi_tolerance);
}

VerifierReport oracle_check(const ScenarioConfig& c, const FlowTrace& trace, const GridMap& u0)
{
  const FlowTrace ref = euclid_heat_oracle(u0, trace.tau, static_cast<int>(trace.steps()));
  VerifierReport rep;
  rep.id = "oracle";
  rep.tolerance = c.verify.oracle_tolerance;
  rep.resolution = "n=" + std::to_string(c.n) + " N=" + std::to_string(c.N) + " tau=" + fmt(trace.tau) +
                   " steps=" + std::to_string(trace.steps());
  for (std::size_t k = 0; k < trace.slices.size(); ++k) {
    const double d = l2_distance(trace.slices[k], ref.slices[k]);
    if (d > rep.worst_value) {
      rep.worst_value = d;
      rep.location = "step " + std::to_string(k);
    }
  }
  rep.metrics = {{"final_deviation", l2_distance(trace.slices.back(), ref.slices.back())}};
  rep.pass = rep.worst_value <= rep.tolerance;
  rep.note = "L2 distance to the dense implicit-Euler heat solve";
  return rep;
}

FlowTrace harnack_trace(const ScenarioConfig& c, const FlowTrace& trace, const GridMap& u0)
{
  const double rmax = *std::max_element(c.verify.scan_radii.begin(), c.verify.scan_radii.end());
  const double need = c.verify.scan_time + rmax * rmax;
  // one extra step: the time density lives on the intervals between slices
  const int steps = static_cast<int>(std::ceil(need / trace.tau - 1e-9)) + 1;
  if (static_cast<std::size_t>(steps) <= trace.steps()) return trace;
  return run_flow(u0, trace.tau, steps, solver_options(c));
}

} // namespace

ScenarioOutcome run_scenario(const ScenarioConfig& config, const RunOptions& options)
{
  ScenarioConfig c = config;
  if (options.only) c.verify.checks = *options.only;
  if (c.oracle && std::find(c.verify.checks.begin(), c.verify.checks.end(), "oracle") == c.verify.checks.end())
    c.verify.checks.push_back("oracle");
  c.validate();

  ScenarioOutcome out;
  const fs::path dir(c.output);
  fs::create_directories(dir);
  clear_artifacts(dir);
  auto emit = [&](const std::string& name, const std::string& bytes) {
    write_file(dir / name, bytes);
    out.files.push_back(name);
  };

  // the config as given (not narrowed by `only`) identifies the experiment
  const std::string config_text = config_to_json(config).dump(2) + "\n";
  emit("config.json", config_text);

  const Grid g = c.grid();
  const GridMap u0 = make_preset(g, c.space, c.preset());
  const auto wants = [&](const std::string& name) {
    return std::find(c.verify.checks.begin(), c.verify.checks.end(), name) != c.verify.checks.end();
  };
  const auto fail = [&](const std::string& what, const std::exception& e) {
    out.errors.push_back(what + ": " + e.what());
  };

  std::optional<FlowTrace> trace;
  if (c.solver) {
    try {
      trace = run_flow(u0, c.solver->tau, c.solver->steps, solver_options(c));
      if (options.write_flow) {
        emit("trace.ndjson", render([&](std::ostream& os) { write_trace_ndjson(os, *trace); }));
        emit("diagnostics.csv", render([&](std::ostream& os) { write_diagnostics_csv(os, *trace); }));
        emit("density_final.csv",
             render([&](std::ostream& os) { write_density_csv(os, energy_density(trace->slices.back())); }));
      }
    } catch (const std::exception& e) {
      fail("flow", e);
    }
  }

  // One WED solve at the smallest eps serves the audits on WED output.
  std::optional<SpaceTimeMap> wed;
  const bool need_wed = c.wed && (options.write_wed || wants("weak_wed") || wants("wed_energy_bound"));
  if (need_wed) {
    const double eps = c.wed->eps_list.back();
    try {
      wed = wed_minimize(u0, eps, c.wed->effective_dt(), c.wed->effective_T(eps), wed_options(c));
      if (options.write_wed) {
        emit("wed.ndjson", render([&](std::ostream& os) { write_spacetime_ndjson(os, *wed); }));
        emit("wed_diagnostics.csv", render([&](std::ostream& os) { write_wed_diagnostics_csv(os, *wed); }));
      }
    } catch (const std::exception& e) {
      fail("wed (eps=" + fmt(eps) + ")", e);
    }
  }

  const auto& v = c.verify;
  const auto family_for = [&](const SliceView& view) {
    return TestFunctionFamily::lattice(view.grid(), static_cast<int>(view.count()), v.family.space_stride,
                                       v.family.time_stride, v.family.radii());
  };
  const auto scan_centers = [&]() {
    std::vector<ScanCenter> centers;
    for (std::size_t x : strided_nodes(g, v.scan_node_stride)) centers.push_back({x, v.scan_time});
    return centers;
  };

  for (const auto& name : c.verify.checks) {
    const bool flow_check = name != "weak_wed" && name != "wed_convergence" && name != "wed_energy_bound" &&
                            name != "lipschitz";
    if (flow_check && !trace) {
      out.errors.push_back(name + ": skipped, the flow did not complete");
      continue;
    }
    if ((name == "weak_wed" || name == "wed_energy_bound") && !wed) {
      out.errors.push_back(name + ": skipped, the WED solve did not complete");
      continue;
    }
    try {
      VerifierReport rep;
      if (name == "evi") {
        rep = evi_suite(c, *trace, u0);
      } else if (name == "dissipation") {
        rep = dissipation_check(*trace, v.dissipation_tolerance);
      } else if (name == "contraction") {
        // a second flow from other data of the same family: random smooth,
        // or another constant when the scenario itself is constant
        PresetParams other = c.preset();
        other.kind = PresetKind::random_smooth;
        other.seed = c.seed * 31 + 101;
        Rng rng(c.seed ^ 0x5eedc0de0002ULL);
        const GridMap v0 = c.initial.kind == PresetKind::constant ? GridMap(g, c.space, random_point(c.space, rng, 1.0))
                                                                  : make_preset(g, c.space, other);
        const FlowTrace second = run_flow(v0, trace->tau, static_cast<int>(trace->steps()), solver_options(c));
        rep = contraction_check(*trace, second, v.contraction_tolerance);
      } else if (name == "weak_grad") {
        const auto view = SliceView::of(*trace);
        rep = weak_parabolic_residual(view, {FieldKind::grad_density, 1}, {0.0, 1.0, 1.0, v.curvature_constant},
                                      family_for(view), v.weak_tolerance);
      } else if (name == "weak_pair") {
        const auto view = SliceView::of(*trace);
        rep = weak_parabolic_residual(view, {FieldKind::pair_distance, v.pair_delta}, {0.0, 1.0, 2.0, 0.0},
                                      family_for(view), v.weak_tolerance);
      } else if (name == "weak_time") {
        const auto view = SliceView::of(*trace);
        rep = weak_parabolic_residual(view, {FieldKind::time_density, 1}, {0.0, 1.0, 2.0, 0.0}, family_for(view),
                                      v.weak_tolerance);
      } else if (name == "weak_wed") {
        const auto view = SliceView::of(*wed);
        rep = weak_parabolic_residual(view, {FieldKind::grad_density, 1},
                                      {wed->eps, 1.0, 1.0, v.curvature_constant}, family_for(view), v.weak_tolerance);
      } else if (name == "frequency") {
        rep = frequency_suite(*trace, v);
      } else if (name == "lipschitz") {
        rep = lipschitz_scaling_study(u0, scan_centers(), v.scan_radii, wed_options(c), 4.0, v.ratio_limit);
      } else if (name == "harnack") {
        rep = harnack_scaling_study(harnack_trace(c, *trace, u0), scan_centers(), v.scan_radii, v.ratio_limit);
      } else if (name == "wed_convergence") {
        ConvergenceStudyOptions o;
        o.dt = c.wed->effective_dt();
        o.t_compare = c.wed->t_compare;
        o.wed = wed_options(c);
        rep = wed_convergence_study(u0, c.wed->eps_list, o);
      } else if (name == "wed_energy_bound") {
        rep = wed_energy_bound(*wed);
      } else if (name == "oracle") {
        rep = oracle_check(c, *trace, u0);
      }
      rep.seed = c.seed;
      emit("report_" + name + ".json", to_json(rep).dump(2) + "\n");
      out.reports.push_back(std::move(rep));
    } catch (const std::exception& e) {
      fail(name, e);
    }
  }

  emit("summary.csv", render([&](std::ostream& os) { write_report_csv(os, out.reports); }));
  const Json manifest = build_manifest(dir, sha256_hex(config_text), c.seed);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  out.files.push_back("manifest.json");

  const bool all_pass = std::all_of(out.reports.begin(), out.reports.end(), [](const auto& r) { return r.pass; });
  out.exit_code = (all_pass && out.errors.empty()) ? 0 : 1;
  return out;
}

} // namespace npcflow
