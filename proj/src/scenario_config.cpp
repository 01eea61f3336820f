#include "npcflow/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace npcflow {

namespace {

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be rejected.
class ObjectReader {
public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path))
  {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json* find(const std::string& key)
  {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <class T> bool read(const std::string& key, T& out)
  {
    const Json* v = find(key);
    if (!v) return false;
    out = convert<T>(*v, sub(key));
    return true;
  }

  template <class T> T require(const std::string& key)
  {
    const Json* v = find(key);
    if (!v) throw ConfigError(sub(key), "required field is missing");
    return convert<T>(*v, sub(key));
  }

  void finish() const
  {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(sub(it.key()), "unknown key");
  }

  template <class T> static T convert(const Json& v, const std::string& path)
  {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(path, "expected a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(path, "expected a string");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
      if (std::is_unsigned_v<T> && !v.is_number_unsigned() && v.template get<std::int64_t>() < 0)
        throw ConfigError(path, "expected a nonnegative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(path, "expected a number");
    } else {
      if (!v.is_array()) throw ConfigError(path, "expected an array");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(convert<typename T::value_type>(v[i], path + "[" + std::to_string(i) + "]"));
      return out;
    }
    return v.get<T>();
  }

private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

TargetSpace parse_space(const Json& j, const std::string& path)
{
  ObjectReader r(j, path);
  const auto kind = r.require<std::string>("kind");
  TargetSpace out;
  try {
    if (kind == "euclidean") {
      out = TargetSpace::euclidean(r.require<int>("dim"));
    } else if (kind == "spider") {
      out = TargetSpace::spider(r.require<int>("num_rays"));
    } else if (kind == "hyperbolic2") {
      out = TargetSpace::hyperbolic2();
    } else if (kind == "product") {
      const Json* f = r.find("factors");
      if (!f || !f->is_array()) throw ConfigError(r.sub("factors"), "expected an array of spaces");
      std::vector<TargetSpace> factors;
      for (std::size_t i = 0; i < f->size(); ++i)
        factors.push_back(parse_space((*f)[i], r.sub("factors") + "[" + std::to_string(i) + "]"));
      out = TargetSpace::product(std::move(factors));
    } else {
      throw ConfigError(r.sub("kind"), "unknown space kind '" + kind + "'");
    }
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
  r.finish();
  return out;
}

template <class Enum, class Parse> Enum parse_enum(const std::string& s, const std::string& path, Parse parse)
{
  try {
    return parse(s);
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
}

void positive(double v, const std::string& path)
{
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(path, "must be positive");
}

} // namespace

double WedBlock::effective_dt() const
{
  if (dt > 0.0) return dt;
  return *std::min_element(eps_list.begin(), eps_list.end()) / 4.0;
}

double WedBlock::effective_T(double eps) const { return T > 0.0 ? T : t_compare + 10.0 * eps; }

std::vector<BumpRadius> FamilyConfig::radii() const
{
  std::vector<BumpRadius> out;
  for (int s : space_radii)
    for (int t : time_radii) out.push_back({s, t});
  return out;
}

PresetParams ScenarioConfig::preset() const
{
  PresetParams p = initial;
  p.seed = initial_seed.value_or(seed);
  return p;
}

const std::vector<std::string>& known_checks()
{
  static const std::vector<std::string> names{
      "evi",        "dissipation",     "contraction",    "weak_grad",       "weak_pair",
      "weak_time",  "weak_wed",        "frequency",      "lipschitz",       "harnack",
      "wed_convergence", "wed_energy_bound", "oracle"};
  return names;
}

void ScenarioConfig::validate() const
{
  try {
    (void)grid();
  } catch (const DomainError& e) {
    throw ConfigError("grid", e.what());
  }
  if (!solver && !wed) throw ConfigError("solver", "at least one of the solver and wed blocks is required");
  if (solver) {
    positive(solver->tau, "solver.tau");
    if (solver->steps < 1) throw ConfigError("solver.steps", "must be at least 1");
    positive(solver->tolerance, "solver.tolerance");
    if (solver->max_sweeps < 1) throw ConfigError("solver.max_sweeps", "must be at least 1");
    if (solver->order == SweepOrder::red_black && N % 2 != 0)
      throw ConfigError("solver.order", "red_black needs an even number of nodes per axis");
  }
  if (wed) {
    if (wed->eps_list.empty()) throw ConfigError("wed.eps", "need eps or eps_list");
    for (std::size_t i = 0; i < wed->eps_list.size(); ++i) {
      positive(wed->eps_list[i], "wed.eps_list[" + std::to_string(i) + "]");
      if (i > 0 && !(wed->eps_list[i] < wed->eps_list[i - 1]))
        throw ConfigError("wed.eps_list", "must be strictly descending");
    }
    if (wed->dt < 0.0) throw ConfigError("wed.dt", "must be positive");
    const double dt = wed->effective_dt();
    for (double e : wed->eps_list) {
      if (dt > e / 4.0 * (1.0 + 1e-12)) throw ConfigError("wed.dt", "must be at most eps/4 for every eps");
      if (wed->effective_T(e) < 10.0 * e * (1.0 - 1e-12)) throw ConfigError("wed.T", "must be at least 10 eps");
    }
    positive(wed->t_compare, "wed.t_compare");
    positive(wed->tolerance, "wed.tolerance");
    if (wed->max_sweeps < 1) throw ConfigError("wed.max_sweeps", "must be at least 1");
  }
  if (initial.amplitude < 0.0) throw ConfigError("initial.amplitude", "must be nonnegative");
  positive(initial.correlation_length, "initial.correlation_length");
  if (initial.kind == PresetKind::linear_core && !(initial.core_half_width > 0.0 && initial.core_half_width < 0.5 * L))
    throw ConfigError("initial.core_half_width", "must be in (0, L/2)");
  if (initial.kind == PresetKind::three_ray_symmetric && !space.is<SpiderSpace>())
    throw ConfigError("initial.preset", "three_ray_symmetric needs a spider target");

  const auto& known = known_checks();
  for (std::size_t i = 0; i < verify.checks.size(); ++i) {
    const auto& c = verify.checks[i];
    const std::string path = "verify.checks[" + std::to_string(i) + "]";
    if (std::find(known.begin(), known.end(), c) == known.end()) throw ConfigError(path, "unknown check '" + c + "'");
    const bool needs_flow = c == "evi" || c == "dissipation" || c == "contraction" || c == "weak_grad" ||
                            c == "weak_pair" || c == "weak_time" || c == "frequency" || c == "harnack" ||
                            c == "oracle";
    if (needs_flow && !solver) throw ConfigError(path, "check '" + c + "' needs a solver block");
    const bool needs_wed = c == "weak_wed" || c == "wed_convergence" || c == "wed_energy_bound";
    if (needs_wed && !wed) throw ConfigError(path, "check '" + c + "' needs a wed block");
    if (c == "oracle" && !space.is<EuclideanSpace>()) throw ConfigError(path, "oracle needs a Euclidean target");
  }
  if ((oracle) && !space.is<EuclideanSpace>()) throw ConfigError("oracle", "oracle needs a Euclidean target");
  if (oracle && !solver) throw ConfigError("oracle", "oracle needs a solver block");
  const auto& f = verify.family;
  if (f.space_stride < 1) throw ConfigError("verify.family.space_stride", "must be at least 1");
  if (f.time_stride < 1) throw ConfigError("verify.family.time_stride", "must be at least 1");
  if (f.space_radii.empty()) throw ConfigError("verify.family.space_radii", "must not be empty");
  if (f.time_radii.empty()) throw ConfigError("verify.family.time_radii", "must not be empty");
  // the N/2 bound only matters once a bump family is actually built
  const bool weak = std::any_of(verify.checks.begin(), verify.checks.end(),
                                [](const std::string& c) { return c.rfind("weak_", 0) == 0; });
  for (int r : f.space_radii)
    if (r < 1 || (weak && 2 * r >= N)) throw ConfigError("verify.family.space_radii", "radii must be in [1, N/2)");
  for (int r : f.time_radii)
    if (r < 1) throw ConfigError("verify.family.time_radii", "radii must be at least 1");
  if (!(verify.curvature_constant >= 0.0)) throw ConfigError("verify.curvature_constant", "must be nonnegative");
  if (verify.pair_delta < 1) throw ConfigError("verify.pair_delta", "must be at least 1");
  positive(verify.weak_tolerance, "verify.tolerances.weak");
  positive(verify.evi_tolerance, "verify.tolerances.evi");
  positive(verify.dissipation_tolerance, "verify.tolerances.dissipation");
  positive(verify.contraction_tolerance, "verify.tolerances.contraction");
  positive(verify.frequency_tolerance, "verify.tolerances.frequency");
  positive(verify.ratio_limit, "verify.tolerances.ratio_limit");
  positive(verify.oracle_tolerance, "verify.tolerances.oracle");
  for (double r : verify.frequency_radii) positive(r, "verify.frequency.radii");
  for (double r : verify.scan_radii) positive(r, "verify.scan.radii");
  positive(verify.scan_time, "verify.scan.time");
  for (std::size_t x : verify.frequency_nodes)
    if (x >= grid().size()) throw ConfigError("verify.frequency.nodes", "node index outside the grid");
  if (verify.frequency_node_stride < 1) throw ConfigError("verify.frequency.node_stride", "must be at least 1");
  if (verify.scan_node_stride < 1) throw ConfigError("verify.scan.node_stride", "must be at least 1");
  if (output.empty()) throw ConfigError("output", "must not be empty");
}

ScenarioConfig parse_config(const Json& j)
{
  ScenarioConfig c;
  ObjectReader root(j, "");

  if (const Json* g = root.find("grid")) {
    ObjectReader r(*g, "grid");
    r.read("n", c.n);
    r.read("N", c.N);
    r.read("L", c.L);
    r.finish();
  }
  if (const Json* s = root.find("space")) c.space = parse_space(*s, "space");
  if (const Json* in = root.find("initial")) {
    ObjectReader r(*in, "initial");
    std::string preset;
    if (r.read("preset", preset))
      c.initial.kind = parse_enum<PresetKind>(preset, "initial.preset", [](const std::string& s) { return parse_preset(s); });
    std::uint64_t seed = 0;
    if (r.read("seed", seed)) c.initial_seed = seed;
    r.read("amplitude", c.initial.amplitude);
    r.read("correlation_length", c.initial.correlation_length);
    r.read("core_half_width", c.initial.core_half_width);
    r.read("sharpness", c.initial.sharpness);
    r.finish();
  }
  if (const Json* s = root.find("solver")) {
    ObjectReader r(*s, "solver");
    SolverBlock b;
    r.read("tau", b.tau);
    r.read("steps", b.steps);
    std::string order;
    if (r.read("order", order))
      b.order = parse_enum<SweepOrder>(order, "solver.order", [](const std::string& x) { return parse_sweep_order(x); });
    r.read("tolerance", b.tolerance);
    r.read("max_sweeps", b.max_sweeps);
    r.finish();
    c.solver = b;
  }
  if (const Json* w = root.find("wed")) {
    ObjectReader r(*w, "wed");
    WedBlock b;
    double eps = 0.0;
    const bool has_eps = r.read("eps", eps);
    const bool has_list = r.read("eps_list", b.eps_list);
    if (has_eps && has_list) throw ConfigError("wed.eps", "give either eps or eps_list, not both");
    if (has_eps) b.eps_list = {eps};
    r.read("dt", b.dt);
    r.read("T", b.T);
    r.read("t_compare", b.t_compare);
    r.read("tolerance", b.tolerance);
    r.read("max_sweeps", b.max_sweeps);
    std::string q;
    if (r.read("quadrature", q))
      b.quadrature = parse_enum<WedQuadrature>(q, "wed.quadrature", [](const std::string& x) { return parse_wed_quadrature(x); });
    r.finish();
    c.wed = b;
  }
  if (const Json* v = root.find("verify")) {
    ObjectReader r(*v, "verify");
    auto& vb = c.verify;
    r.read("checks", vb.checks);
    r.read("pair_delta", vb.pair_delta);
    r.read("curvature_constant", vb.curvature_constant);
    if (const Json* f = r.find("family")) {
      ObjectReader fr(*f, "verify.family");
      fr.read("space_stride", vb.family.space_stride);
      fr.read("time_stride", vb.family.time_stride);
      fr.read("space_radii", vb.family.space_radii);
      fr.read("time_radii", vb.family.time_radii);
      fr.finish();
    }
    if (const Json* t = r.find("tolerances")) {
      ObjectReader tr(*t, "verify.tolerances");
      tr.read("weak", vb.weak_tolerance);
      tr.read("evi", vb.evi_tolerance);
      tr.read("dissipation", vb.dissipation_tolerance);
      tr.read("contraction", vb.contraction_tolerance);
      tr.read("frequency", vb.frequency_tolerance);
      tr.read("ratio_limit", vb.ratio_limit);
      tr.read("oracle", vb.oracle_tolerance);
      tr.finish();
    }
    if (const Json* f = r.find("frequency")) {
      ObjectReader fr(*f, "verify.frequency");
      fr.read("radii", vb.frequency_radii);
      fr.read("node_stride", vb.frequency_node_stride);
      fr.read("nodes", vb.frequency_nodes);
      fr.finish();
    }
    if (const Json* s = r.find("scan")) {
      ObjectReader sr(*s, "verify.scan");
      sr.read("radii", vb.scan_radii);
      sr.read("time", vb.scan_time);
      sr.read("node_stride", vb.scan_node_stride);
      sr.finish();
    }
    r.finish();
  }
  root.read("output", c.output);
  root.read("seed", c.seed);
  root.read("oracle", c.oracle);
  root.finish();
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path)
{
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

Json config_to_json(const ScenarioConfig& c)
{
  Json j;
  j["grid"] = {{"n", c.n}, {"N", c.N}, {"L", c.L}};
  j["space"] = to_json(c.space);
  Json in;
  in["preset"] = to_string(c.initial.kind);
  if (c.initial_seed) in["seed"] = *c.initial_seed;
  in["amplitude"] = c.initial.amplitude;
  in["correlation_length"] = c.initial.correlation_length;
  in["core_half_width"] = c.initial.core_half_width;
  in["sharpness"] = c.initial.sharpness;
  j["initial"] = in;
  if (c.solver) {
    const auto& s = *c.solver;
    j["solver"] = {{"tau", s.tau},
                   {"steps", s.steps},
                   {"order", to_string(s.order)},
                   {"tolerance", s.tolerance},
                   {"max_sweeps", s.max_sweeps}};
  }
  if (c.wed) {
    const auto& w = *c.wed;
    j["wed"] = {{"eps_list", w.eps_list}, {"dt", w.dt},           {"T", w.T},
                {"t_compare", w.t_compare}, {"tolerance", w.tolerance}, {"max_sweeps", w.max_sweeps},
                {"quadrature", to_string(w.quadrature)}};
  }
  const auto& v = c.verify;
  Json vj;
  vj["checks"] = v.checks;
  vj["pair_delta"] = v.pair_delta;
  vj["curvature_constant"] = v.curvature_constant;
  vj["family"] = {{"space_stride", v.family.space_stride},
                  {"time_stride", v.family.time_stride},
                  {"space_radii", v.family.space_radii},
                  {"time_radii", v.family.time_radii}};
  vj["tolerances"] = {{"weak", v.weak_tolerance},
                      {"evi", v.evi_tolerance},
                      {"dissipation", v.dissipation_tolerance},
                      {"contraction", v.contraction_tolerance},
                      {"frequency", v.frequency_tolerance},
                      {"ratio_limit", v.ratio_limit},
                      {"oracle", v.oracle_tolerance}};
  vj["frequency"] = {{"radii", v.frequency_radii}, {"node_stride", v.frequency_node_stride},
                      {"nodes", v.frequency_nodes}};
  vj["scan"] = {{"radii", v.scan_radii}, {"time", v.scan_time}, {"node_stride", v.scan_node_stride}};
  j["verify"] = vj;
  j["output"] = c.output;
  j["seed"] = c.seed;
  j["oracle"] = c.oracle;
  return j;
}

} // namespace npcflow
