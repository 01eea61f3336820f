#pragma once

// Serialization: JSON descriptors for spaces and points, NDJSON traces,
// CSV diagnostics, JSON reports, SHA-256 manifests, and trace replay.

#include "npcflow/verifiers.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace npcflow {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
/// Written into trace headers; replay accepts any producer with a known schema.
extern const char* const kProducer;

/// Malformed, truncated or unsupported input.
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

Json to_json(const TargetSpace& space);
TargetSpace space_from_json(const Json& j);
Json to_json(const TargetPoint& p);
/// Parses and validates a point of `space`.
TargetPoint point_from_json(const Json& j, const TargetSpace& space);
Json to_json(const Grid& g);
Grid grid_from_json(const Json& j);

/// Header line, then one {"index", "point"} line per node.
void write_gridmap_ndjson(std::ostream& os, const GridMap& u);
GridMap read_gridmap_ndjson(std::istream& is);

struct TraceHeader {
  std::string schema;
  int schema_version = 0;
  std::string producer;
  std::string type; // "flow" or "wed"
  std::size_t slices = 0;
};

/// Header line, then one record per slice with its values, diagnostics and
/// per-node energy density.
void write_trace_ndjson(std::ostream& os, const FlowTrace& trace);
FlowTrace read_trace_ndjson(std::istream& is, TraceHeader* header = nullptr);

void write_spacetime_ndjson(std::ostream& os, const SpaceTimeMap& st);
SpaceTimeMap read_spacetime_ndjson(std::istream& is, TraceHeader* header = nullptr);

/// step,energy,max_time_density,sweeps,residual
void write_diagnostics_csv(std::ostream& os, const FlowTrace& trace);
/// slice,time,energy
void write_wed_diagnostics_csv(std::ostream& os, const SpaceTimeMap& st);
/// node_index,value
void write_density_csv(std::ostream& os, const DensityField& f);

Json to_json(const VerifierReport& r);
/// id,pass,worst_value,tolerance,location
void write_report_csv(std::ostream& os, const std::vector<VerifierReport>& reports);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Manifest over the regular files of `dir` (sorted, excluding the manifest
/// itself): path, byte count and SHA-256 of each, plus the config hash and seed.
Json build_manifest(const std::filesystem::path& dir, const std::string& config_sha256, std::uint64_t seed);

struct ReplayResult {
  bool match = true;
  std::size_t slices = 0;
  TraceHeader header;
  std::vector<std::string> diffs;
};

/// Re-derives energies and densities from the stored slices of a flow or
/// WED trace and compares them bit for bit with the stored values.  Stored
/// points must also be in canonical form.  Throws FormatError on a corrupt
/// or truncated file.
ReplayResult replay(std::istream& is);
ReplayResult replay_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Writes `bytes` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, const std::string& bytes);

} // namespace npcflow
