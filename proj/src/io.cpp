#include "npcflow/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace npcflow {

const char* const kProducer = "npcflow 1.0.0";

namespace {

constexpr const char* kTraceSchema = "npcflow.trace";
constexpr const char* kMapSchema = "npcflow.gridmap";
constexpr std::size_t kMaxDiffs = 64;

const Json& field(const Json& j, const char* key)
{
  if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  return j.at(key);
}

Json parse_line(std::istream& is, const char* what, std::size_t line_no)
{
  std::string line;
  if (!std::getline(is, line)) throw FormatError(std::string("truncated input: missing ") + what);
  try {
    return Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
  }
}

std::string csv_number(double v)
{
  // shortest text that reads back to the same double
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

Json values_json(const GridMap& u)
{
  Json arr = Json::array();
  for (const auto& p : u.values()) arr.push_back(to_json(p));
  return arr;
}

GridMap values_from_json(const Json& arr, const Grid& g, const TargetSpace& space)
{
  if (!arr.is_array() || arr.size() != g.size()) throw FormatError("slice has the wrong number of values");
  std::vector<TargetPoint> vals;
  vals.reserve(arr.size());
  for (const auto& p : arr) vals.push_back(point_from_json(p, space));
  return GridMap(g, space, std::move(vals));
}

Json header_json(const char* type, const Grid& g, const TargetSpace& space, std::size_t slices)
{
  Json h;
  h["schema"] = kTraceSchema;
  h["schema_version"] = kSchemaVersion;
  h["producer"] = kProducer;
  h["type"] = type;
  h["grid"] = to_json(g);
  h["space"] = to_json(space);
  h["slices"] = slices;
  return h;
}

TraceHeader parse_header(const Json& h)
{
  TraceHeader th;
  try {
    th.schema = field(h, "schema").get<std::string>();
    th.schema_version = field(h, "schema_version").get<int>();
    th.producer = field(h, "producer").get<std::string>();
    th.type = field(h, "type").get<std::string>();
    th.slices = field(h, "slices").get<std::size_t>();
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad trace header: ") + e.what());
  }
  if (th.schema != kTraceSchema) throw FormatError("not a trace file (schema '" + th.schema + "')");
  if (th.schema_version != kSchemaVersion)
    throw FormatError("unsupported trace schema version " + std::to_string(th.schema_version));
  if (th.slices == 0) throw FormatError("trace has no slices");
  return th;
}

void add_diff(ReplayResult& r, std::string msg)
{
  r.match = false;
  if (r.diffs.size() < kMaxDiffs) r.diffs.push_back(std::move(msg));
}

void compare(ReplayResult& r, const std::string& where, double stored, double recomputed)
{
  if (stored != recomputed && !(std::isnan(stored) && std::isnan(recomputed)))
    add_diff(r, where + ": stored " + csv_number(stored) + ", recomputed " + csv_number(recomputed));
}

double number(const Json& j, const char* key)
{
  const Json& v = field(j, key);
  if (!v.is_number()) throw FormatError(std::string("field '") + key + "' is not a number");
  return v.get<double>();
}

} // namespace

Json to_json(const TargetSpace& space)
{
  Json j;
  j["kind"] = space.kind_name();
  if (space.is<EuclideanSpace>()) j["dim"] = space.as<EuclideanSpace>().dim;
  if (space.is<SpiderSpace>()) j["num_rays"] = space.as<SpiderSpace>().num_rays;
  if (space.is<ProductSpace>()) {
    j["factors"] = Json::array();
    for (const auto& f : space.as<ProductSpace>().factors) j["factors"].push_back(to_json(f));
  }
  return j;
}

TargetSpace space_from_json(const Json& j)
{
  try {
    const auto kind = field(j, "kind").get<std::string>();
    if (kind == "euclidean") return TargetSpace::euclidean(field(j, "dim").get<int>());
    if (kind == "spider") return TargetSpace::spider(field(j, "num_rays").get<int>());
    if (kind == "hyperbolic2") return TargetSpace::hyperbolic2();
    if (kind == "product") {
      std::vector<TargetSpace> factors;
      for (const auto& f : field(j, "factors")) factors.push_back(space_from_json(f));
      return TargetSpace::product(std::move(factors));
    }
    throw FormatError("unknown space kind '" + kind + "'");
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad space descriptor: ") + e.what());
  }
}

Json to_json(const TargetPoint& p)
{
  Json j;
  if (p.is<EuclideanPoint>()) {
    j["kind"] = "euclidean";
    j["coords"] = p.as<EuclideanPoint>().coords;
  } else if (p.is<SpiderPoint>()) {
    j["kind"] = "spider";
    j["ray"] = p.as<SpiderPoint>().ray;
    j["radius"] = p.as<SpiderPoint>().radius;
  } else if (p.is<HyperboloidPoint>()) {
    const auto& x = p.as<HyperboloidPoint>().x;
    j["kind"] = "hyperbolic2";
    j["x"] = {x[0], x[1], x[2]};
  } else {
    j["kind"] = "product";
    j["parts"] = Json::array();
    for (const auto& q : p.as<ProductPoint>().parts) j["parts"].push_back(to_json(q));
  }
  return j;
}

TargetPoint point_from_json(const Json& j, const TargetSpace& space)
{
  TargetPoint p;
  try {
    const auto kind = field(j, "kind").get<std::string>();
    if (kind == "euclidean") {
      p = TargetPoint::euclidean(field(j, "coords").get<std::vector<double>>());
    } else if (kind == "spider") {
      p = TargetPoint::spider(field(j, "ray").get<int>(), field(j, "radius").get<double>());
    } else if (kind == "hyperbolic2") {
      const auto x = field(j, "x").get<std::vector<double>>();
      if (x.size() != 3) throw FormatError("hyperboloid point needs three coordinates");
      p = HyperboloidPoint{{x[0], x[1], x[2]}};
    } else if (kind == "product") {
      if (!space.is<ProductSpace>()) throw KindMismatch("product point for a non-product space");
      const auto& factors = space.as<ProductSpace>().factors;
      const Json& parts = field(j, "parts");
      if (parts.size() != factors.size()) throw KindMismatch("product point has the wrong number of parts");
      std::vector<TargetPoint> ps;
      for (std::size_t i = 0; i < factors.size(); ++i) ps.push_back(point_from_json(parts[i], factors[i]));
      p = TargetPoint::product(std::move(ps));
    } else {
      throw FormatError("unknown point kind '" + kind + "'");
    }
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad point: ") + e.what());
  }
  check_point(space, p);
  return p;
}

Json to_json(const Grid& g)
{
  Json j;
  j["n"] = g.dim();
  j["N"] = g.nodes_per_axis();
  j["L"] = g.length();
  return j;
}

Grid grid_from_json(const Json& j)
{
  try {
    return Grid(field(j, "n").get<int>(), field(j, "N").get<int>(), field(j, "L").get<double>());
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad grid descriptor: ") + e.what());
  }
}

void write_gridmap_ndjson(std::ostream& os, const GridMap& u)
{
  Json h;
  h["schema"] = kMapSchema;
  h["schema_version"] = kSchemaVersion;
  h["grid"] = to_json(u.grid());
  h["space"] = to_json(u.space());
  os << h.dump() << '\n';
  for (std::size_t x = 0; x < u.size(); ++x) {
    Json rec;
    rec["index"] = x;
    rec["point"] = to_json(u[x]);
    os << rec.dump() << '\n';
  }
}

GridMap read_gridmap_ndjson(std::istream& is)
{
  const Json h = parse_line(is, "header", 1);
  if (!h.contains("schema") || h["schema"] != kMapSchema) throw FormatError("not a grid map file");
  const Grid g = grid_from_json(field(h, "grid"));
  const TargetSpace space = space_from_json(field(h, "space"));
  std::vector<TargetPoint> vals;
  for (std::size_t x = 0; x < g.size(); ++x) {
    const Json rec = parse_line(is, "node record", x + 2);
    if (field(rec, "index").get<std::size_t>() != x) throw FormatError("node records out of order");
    vals.push_back(point_from_json(field(rec, "point"), space));
  }
  return GridMap(g, space, std::move(vals));
}

void write_trace_ndjson(std::ostream& os, const FlowTrace& trace)
{
  Json h = header_json("flow", trace.grid(), trace.space(), trace.slices.size());
  h["tau"] = trace.tau;
  os << h.dump() << '\n';
  for (std::size_t k = 0; k < trace.slices.size(); ++k) {
    const auto& d = trace.diagnostics[k];
    Json rec;
    rec["slice"] = k;
    rec["values"] = values_json(trace.slices[k]);
    rec["diagnostics"] = {{"energy", d.energy},
                          {"max_time_density", d.max_time_density},
                          {"sweeps", d.sweeps},
                          {"residual", d.residual}};
    rec["density"] = energy_density(trace.slices[k]).values;
    os << rec.dump() << '\n';
  }
}

FlowTrace read_trace_ndjson(std::istream& is, TraceHeader* header)
{
  const Json h = parse_line(is, "header", 1);
  const TraceHeader th = parse_header(h);
  if (th.type != "flow") throw FormatError("trace type '" + th.type + "' is not a flow");
  const Grid g = grid_from_json(field(h, "grid"));
  const TargetSpace space = space_from_json(field(h, "space"));
  FlowTrace trace;
  trace.tau = number(h, "tau");
  for (std::size_t k = 0; k < th.slices; ++k) {
    const Json rec = parse_line(is, "slice record", k + 2);
    if (field(rec, "slice").get<std::size_t>() != k) throw FormatError("slice records out of order");
    trace.slices.push_back(values_from_json(field(rec, "values"), g, space));
    const Json& d = field(rec, "diagnostics");
    trace.diagnostics.push_back(SliceDiagnostics{number(d, "energy"), number(d, "max_time_density"),
                                                 field(d, "sweeps").get<int>(), number(d, "residual")});
  }
  if (header) *header = th;
  return trace;
}

void write_spacetime_ndjson(std::ostream& os, const SpaceTimeMap& st)
{
  Json h = header_json("wed", st.grid(), st.space(), st.slices.size());
  h["dt"] = st.dt;
  h["eps"] = st.eps;
  h["horizon"] = st.horizon;
  h["quadrature"] = to_string(st.quadrature);
  h["functional"] = st.functional;
  h["dissipation"] = st.dissipation;
  h["sweeps"] = st.sweeps;
  h["residual"] = st.residual;
  os << h.dump() << '\n';
  for (std::size_t j = 0; j < st.slices.size(); ++j) {
    Json rec;
    rec["slice"] = j;
    rec["values"] = values_json(st.slices[j]);
    rec["energy"] = j < st.energies.size() ? st.energies[j] : dirichlet_energy(st.slices[j]);
    rec["density"] = energy_density(st.slices[j]).values;
    os << rec.dump() << '\n';
  }
}

SpaceTimeMap read_spacetime_ndjson(std::istream& is, TraceHeader* header)
{
  const Json h = parse_line(is, "header", 1);
  const TraceHeader th = parse_header(h);
  if (th.type != "wed") throw FormatError("trace type '" + th.type + "' is not a WED solution");
  const Grid g = grid_from_json(field(h, "grid"));
  const TargetSpace space = space_from_json(field(h, "space"));
  SpaceTimeMap st;
  st.dt = number(h, "dt");
  st.eps = number(h, "eps");
  st.horizon = number(h, "horizon");
  try {
    st.quadrature = parse_wed_quadrature(field(h, "quadrature").get<std::string>());
  } catch (const DomainError& e) {
    throw FormatError(e.what());
  }
  st.functional = number(h, "functional");
  st.dissipation = number(h, "dissipation");
  st.sweeps = field(h, "sweeps").get<int>();
  st.residual = number(h, "residual");
  for (std::size_t j = 0; j < th.slices; ++j) {
    const Json rec = parse_line(is, "slice record", j + 2);
    if (field(rec, "slice").get<std::size_t>() != j) throw FormatError("slice records out of order");
    st.slices.push_back(values_from_json(field(rec, "values"), g, space));
    st.energies.push_back(number(rec, "energy"));
  }
  st.initial_energy = st.energies.front();
  if (header) *header = th;
  return st;
}

void write_diagnostics_csv(std::ostream& os, const FlowTrace& trace)
{
  os << "step,energy,max_time_density,sweeps,residual\n";
  for (std::size_t k = 0; k < trace.diagnostics.size(); ++k) {
    const auto& d = trace.diagnostics[k];
    os << k << ',' << csv_number(d.energy) << ',' << csv_number(d.max_time_density) << ',' << d.sweeps << ','
       << csv_number(d.residual) << '\n';
  }
}

void write_wed_diagnostics_csv(std::ostream& os, const SpaceTimeMap& st)
{
  os << "slice,time,energy\n";
  for (std::size_t j = 0; j < st.energies.size(); ++j)
    os << j << ',' << csv_number(static_cast<double>(j) * st.dt) << ',' << csv_number(st.energies[j]) << '\n';
}

void write_density_csv(std::ostream& os, const DensityField& f)
{
  os << "node_index,value\n";
  for (std::size_t x = 0; x < f.values.size(); ++x) os << x << ',' << csv_number(f.values[x]) << '\n';
}

Json to_json(const VerifierReport& r)
{
  Json j;
  j["id"] = r.id;
  j["pass"] = r.pass;
  j["worst_value"] = r.worst_value;
  j["tolerance"] = r.tolerance;
  j["normalization"] = r.normalization;
  j["location"] = r.location;
  j["seed"] = r.seed;
  j["resolution"] = r.resolution;
  Json m = Json::object();
  for (const auto& [k, v] : r.metrics) m[k] = v;
  j["metrics"] = m;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

void write_report_csv(std::ostream& os, const std::vector<VerifierReport>& reports)
{
  os << "id,pass,worst_value,tolerance,location\n";
  for (const auto& r : reports) {
    std::string loc = r.location;
    std::replace(loc.begin(), loc.end(), ',', ';');
    os << '"' << r.id << "\"," << (r.pass ? "PASS" : "FAIL") << ',' << csv_number(r.worst_value) << ','
       << csv_number(r.tolerance) << ",\"" << loc << "\"\n";
  }
}

std::string sha256_hex(const std::string& bytes)
{
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string read_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes)
{
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << bytes;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

Json build_manifest(const std::filesystem::path& dir, const std::string& config_sha256, std::uint64_t seed)
{
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  Json m;
  m["schema"] = "npcflow.manifest";
  m["schema_version"] = kSchemaVersion;
  m["producer"] = kProducer;
  m["config_sha256"] = config_sha256;
  m["seed"] = seed;
  m["files"] = Json::array();
  for (const auto& f : files) {
    const std::string bytes = read_file(f);
    m["files"].push_back({{"path", std::filesystem::relative(f, dir).generic_string()},
                          {"bytes", bytes.size()},
                          {"sha256", sha256_hex(bytes)}});
  }
  return m;
}

ReplayResult replay(std::istream& is)
{
  ReplayResult r;
  const Json h = parse_line(is, "header", 1);
  r.header = parse_header(h);
  const Grid g = grid_from_json(field(h, "grid"));
  const TargetSpace space = space_from_json(field(h, "space"));
  const bool flow = r.header.type == "flow";
  if (!flow && r.header.type != "wed") throw FormatError("unknown trace type '" + r.header.type + "'");
  const double dt = flow ? number(h, "tau") : number(h, "dt");

  std::vector<GridMap> slices;
  for (std::size_t k = 0; k < r.header.slices; ++k) {
    const Json rec = parse_line(is, "slice record", k + 2);
    const std::string where = "slice " + std::to_string(k);
    if (field(rec, "slice").get<std::size_t>() != k) throw FormatError(where + ": record out of order");
    const Json& vals = field(rec, "values");
    GridMap u = values_from_json(vals, g, space);
    for (std::size_t x = 0; x < g.size(); ++x)
      if (to_json(u[x]).dump() != vals[x].dump())
        add_diff(r, where + " node " + std::to_string(x) + ": stored point is not canonical");

    const double E = dirichlet_energy(u);
    compare(r, where + " energy", flow ? number(field(rec, "diagnostics"), "energy") : number(rec, "energy"), E);
    if (flow && k > 0)
      compare(r, where + " max_time_density", number(field(rec, "diagnostics"), "max_time_density"),
              time_density(slices.back(), u, dt).max());

    const Json& dens = field(rec, "density");
    if (!dens.is_array() || dens.size() != g.size()) throw FormatError(where + ": density has the wrong length");
    const auto recomputed = energy_density(u).values;
    for (std::size_t x = 0; x < g.size(); ++x) {
      if (!dens[x].is_number()) throw FormatError(where + ": density entry is not a number");
      compare(r, where + " node " + std::to_string(x) + " density", dens[x].get<double>(), recomputed[x]);
    }
    slices.push_back(std::move(u));
  }
  std::string extra;
  if (std::getline(is, extra) && !extra.empty()) throw FormatError("trailing data after the last slice");

  if (!flow) {
    const auto q = parse_wed_quadrature(field(h, "quadrature").get<std::string>());
    compare(r, "functional", number(h, "functional"), wed_functional(slices, number(h, "eps"), dt, q));
    CompensatedSum diss;
    for (std::size_t j = 0; j + 1 < slices.size(); ++j) diss.add(l2_distance2(slices[j + 1], slices[j]) / dt);
    compare(r, "dissipation", number(h, "dissipation"), diss.value());
  }
  r.slices = slices.size();
  return r;
}

ReplayResult replay_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return replay(in);
}

} // namespace npcflow
