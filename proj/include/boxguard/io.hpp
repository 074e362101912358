#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "boxguard/guarantee.hpp"
#include "boxguard/monitor.hpp"
#include "boxguard/simharness.hpp"
#include "boxguard/speclang.hpp"

namespace boxguard::io {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

/// Indented, key-sorted JSON with shortest round-trip numbers; the basis
/// of every digest.
std::string canonical_dump(const json &value);

/// SHA-256 of `data`, lowercase hex.
std::string sha256_hex(const std::string &data);

/// Writes to `path` via a temporary file and rename.
void write_file_atomic(const std::filesystem::path &path,
                       const std::string &content);
std::string read_file(const std::filesystem::path &path);

// Sample logs: a header line, then one JSON record per line.
struct SampleLog {
  std::size_t dimension = 0;
  std::vector<std::string> labels;
  std::vector<MonitoredSample> records;
};

SampleLog make_sample_log(std::vector<MonitoredSample> records);
SampleLog parse_samples(std::istream &in);
SampleLog load_samples(const std::filesystem::path &path);
std::string serialize_samples(const SampleLog &log);
void save_samples(const SampleLog &log, const std::filesystem::path &path);

// Monitor artifacts.
json monitor_to_json(const Monitor &monitor); // includes the digest
Monitor monitor_from_json(const json &doc);
std::string serialize_monitor(const Monitor &monitor);
std::string monitor_digest(const Monitor &monitor);
void save_monitor(const Monitor &monitor, const std::filesystem::path &path);
Monitor load_monitor(const std::filesystem::path &path);

json config_to_json(const MonitorConfig &config);
MonitorConfig config_from_json(const json &doc);

// Reports.
json to_json(const BoxGuarantee &g);
json to_json(const CoverageGuarantee &g);
json to_json(const ComponentGuarantee &g);
json to_json(const FormulaGuarantee &g);
json to_json(const ValidationReport &r);
json to_json(const AssessConfig &c);
json to_json(const SyntheticDistribution &d);
json to_json(const ValidationProtocol &p);

AssessConfig assess_config_from_json(const json &doc);
SyntheticDistribution distribution_from_json(const json &doc);
ValidationProtocol protocol_from_json(const json &doc);

// Traces and frames: a header line, then one JSON object per line.
Trace parse_trace(std::istream &in);
Trace load_trace(const std::filesystem::path &path);
std::vector<FrameRecord> parse_frames(std::istream &in);
std::vector<FrameRecord> load_frames(const std::filesystem::path &path);
ExtractionRules rules_from_json(const json &doc);

} // namespace boxguard::io
