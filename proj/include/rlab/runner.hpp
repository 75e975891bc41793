#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlab/probes.hpp"

namespace rlab {

struct manifest_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunManifest {
  std::vector<ProbeConfig> probes;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::vector<std::string> formats{"csv", "json"};
};

// JSON manifest, see README. Throws manifest_error with line:column on parse
// errors and the offending entry on validation errors.
RunManifest parse_manifest(const std::string& text, std::optional<std::uint64_t> seed_override = {});
RunManifest load_manifest(const std::string& path, std::optional<std::uint64_t> seed_override = {});

// Reports in manifest order; configs run concurrently up to `jobs`.
std::vector<ProbeReport> run_manifest(const RunManifest& m, int jobs = 1, bool record_time = false);

// 0 all pass, 1 any fail, 2 any execution error.
int exit_code(const std::vector<ProbeReport>& reports);

std::string format_csv(const std::vector<ProbeReport>& reports);
std::string format_json(const std::vector<ProbeReport>& reports);
std::vector<ProbeReport> parse_reports_json(const std::string& text);

// Temp file + rename; throws std::runtime_error when the path is unwritable.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace rlab
