#include "npcflow/io.hpp"
#include "npcflow/presets.hpp"
#include "npcflow/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

using namespace npcflow;

#ifndef NPCFLOW_FIXTURE_DIR
#error "NPCFLOW_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace {

FlowTrace small_trace(const TargetSpace& s)
{
  const Grid g(1, 16, 2.0);
  PresetParams p;
  p.seed = 3;
  return run_flow(make_preset(g, s, p), 0.01, 6, {});
}

std::string trace_text(const FlowTrace& t)
{
  std::ostringstream os;
  write_trace_ndjson(os, t);
  return os.str();
}

} // namespace

TEST_CASE("space and point descriptors round-trip")
{
  Rng rng(51);
  for (const auto& s : {TargetSpace::euclidean(3), TargetSpace::spider(5), TargetSpace::hyperbolic2(),
                        TargetSpace::product({TargetSpace::euclidean(1), TargetSpace::spider(3)})}) {
    CHECK(space_from_json(to_json(s)) == s);
    for (int i = 0; i < 50; ++i) {
      const auto p = random_point(s, rng);
      CHECK(point_from_json(Json::parse(to_json(p).dump()), s) == p);
    }
  }
  CHECK(to_json(TargetSpace::spider(3)).dump() == R"({"kind":"spider","num_rays":3})");
  CHECK_THROWS_AS(space_from_json(Json::parse(R"({"kind":"sphere"})")), FormatError);
  CHECK_THROWS_AS(point_from_json(Json::parse(R"({"kind":"spider","ray":4,"radius":1.0})"), TargetSpace::spider(3)),
                  KindMismatch);
}

TEST_CASE("gridmap NDJSON round-trip")
{
  const auto t = small_trace(TargetSpace::hyperbolic2());
  std::ostringstream os;
  write_gridmap_ndjson(os, t.slices.back());
  std::istringstream is(os.str());
  CHECK(read_gridmap_ndjson(is) == t.slices.back());
}

TEST_CASE("trace NDJSON round-trip is exact")
{
  for (const auto& s : {TargetSpace::spider(3), TargetSpace::euclidean(2)}) {
    const auto t = small_trace(s);
    std::istringstream is(trace_text(t));
    TraceHeader h;
    const auto back = read_trace_ndjson(is, &h);
    CHECK(h.schema == "npcflow.trace");
    CHECK(h.schema_version == kSchemaVersion);
    CHECK(h.type == "flow");
    CHECK(back.tau == t.tau);
    CHECK(back.slices == t.slices);
    CHECK(back.diagnostics == t.diagnostics);
    // writing again gives the same bytes
    CHECK(trace_text(back) == trace_text(t));
  }
}

TEST_CASE("spacetime NDJSON round-trip")
{
  const Grid g(1, 8, 2.0);
  PresetParams p;
  const auto st = wed_minimize(make_preset(g, TargetSpace::spider(3), p), 0.1, 0.025, 1.0, {});
  std::ostringstream os;
  write_spacetime_ndjson(os, st);
  std::istringstream is(os.str());
  const auto back = read_spacetime_ndjson(is);
  CHECK(back.slices == st.slices);
  CHECK(back.functional == st.functional);
  CHECK(back.eps == st.eps);
  CHECK(back.quadrature == st.quadrature);
  std::istringstream again(os.str());
  CHECK(replay(again).match);
}

TEST_CASE("replay: fresh trace matches")
{
  std::istringstream is(trace_text(small_trace(TargetSpace::spider(3))));
  const auto r = replay(is);
  CHECK(r.match);
  CHECK(r.diffs.empty());
  CHECK(r.slices == 7);
}

TEST_CASE("replay: a flipped digit is reported at the affected node")
{
  const auto t = small_trace(TargetSpace::euclidean(1));
  std::string text = trace_text(t);
  // slice 3, node 5: change one digit of its coordinate
  std::istringstream lines(text);
  std::string line, out;
  int ln = 0;
  while (std::getline(lines, line)) {
    if (ln == 4) {
      auto rec = Json::parse(line);
      const double v = rec["values"][5]["coords"][0].get<double>();
      std::string s = Json(v).dump();
      std::string before = s;
      const auto pos = s.find_last_of("0123456789", s.find_first_of("eE") == std::string::npos ? std::string::npos
                                                                                                 : s.find_first_of("eE") - 1);
      s[pos] = s[pos] == '9' ? '8' : static_cast<char>(s[pos] + 1);
      const auto at = line.find(before);
      REQUIRE(at != std::string::npos);
      line.replace(at, before.size(), s);
    }
    out += line + "\n";
    ++ln;
  }
  REQUIRE(out != text);
  std::istringstream is(out);
  const auto r = replay(is);
  CHECK_FALSE(r.match);
  bool at_node = false;
  for (const auto& d : r.diffs)
    if (d.find("slice 3 node 5 density") != std::string::npos) at_node = true;
  CHECK(at_node);
}

TEST_CASE("replay: corrupt and truncated input")
{
  const std::string text = trace_text(small_trace(TargetSpace::spider(3)));
  {
    std::istringstream is(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(replay(is), FormatError);
  }
  {
    std::istringstream is(text + "{\"extra\":1}\n");
    CHECK_THROWS_AS(replay(is), FormatError);
  }
  {
    std::string bad = text;
    bad.replace(bad.find("\"schema_version\":1"), 18, "\"schema_version\":7");
    std::istringstream is(bad);
    CHECK_THROWS_AS(replay(is), FormatError);
  }
  {
    std::istringstream is("not json\n");
    CHECK_THROWS_AS(replay(is), FormatError);
  }
  CHECK_THROWS_AS(replay_file("/nonexistent/trace.ndjson"), FormatError);
}

TEST_CASE("replay: trace written by another producer version")
{
  const std::filesystem::path dir(NPCFLOW_FIXTURE_DIR);
  for (const char* name : {"flow_spider3_v0.9.ndjson", "wed_euclid1_v0.9.ndjson"}) {
    INFO(name);
    const auto r = replay_file(dir / name);
    CHECK(r.header.producer != kProducer);
    CHECK(r.header.schema_version == kSchemaVersion);
    CHECK(r.match);
    CHECK(r.diffs.empty());
  }
}

TEST_CASE("csv exports")
{
  const auto t = small_trace(TargetSpace::spider(3));
  std::ostringstream os;
  write_diagnostics_csv(os, t);
  const std::string csv = os.str();
  CHECK(csv.rfind("step,energy,max_time_density,sweeps,residual\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);
  std::ostringstream d;
  write_density_csv(d, energy_density(t.slices[0]));
  CHECK(d.str().rfind("node_index,value\n", 0) == 0);
}

TEST_CASE("report json fields")
{
  VerifierReport r;
  r.id = "evi";
  r.pass = false;
  r.worst_value = 0.5;
  r.tolerance = 0.1;
  r.location = "step 3";
  r.seed = 9;
  r.resolution = "n=1";
  const Json j = to_json(r);
  for (const char* k : {"id", "pass", "worst_value", "tolerance", "location", "seed", "resolution"})
    CHECK(j.contains(k));
  std::ostringstream os;
  write_report_csv(os, {r});
  CHECK(os.str() == "id,pass,worst_value,tolerance,location\n\"evi\",FAIL,0.5,0.1,\"step 3\"\n");
}

TEST_CASE("sha256 and manifest")
{
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const auto dir = std::filesystem::temp_directory_path() / "npcflow_manifest_test";
  std::filesystem::remove_all(dir);
  write_file(dir / "b.txt", "bee");
  write_file(dir / "a.txt", "abc");
  write_file(dir / "sub" / "c.txt", "");
  write_file(dir / "manifest.json", "old");
  const Json m = build_manifest(dir, "cafe", 42);
  REQUIRE(m["files"].size() == 3);
  CHECK(m["files"][0]["path"] == "a.txt");
  CHECK(m["files"][0]["sha256"] == sha256_hex("abc"));
  CHECK(m["files"][0]["bytes"] == 3);
  CHECK(m["files"][2]["path"] == "sub/c.txt");
  CHECK(m["seed"] == 42);
  CHECK(m["config_sha256"] == "cafe");
  std::filesystem::remove_all(dir);
}
