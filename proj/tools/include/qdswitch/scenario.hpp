#pragma once

// Scenario runner behind the qdswitch command-line tool. Each scenario reads
// a strict JSON configuration, writes CSV results, a parameter snapshot, a
// metadata sidecar, an optional SVG plot and a manifest with SHA-256 hashes.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qdswitch/params.hpp"

namespace qdswitch::cli {

using json = nlohmann::json;

/// Bad configuration, override or scenario name (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output directory or file could not be written (exit code 4).
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kOk = 0, kConfig = 2, kSimulation = 3, kFilesystem = 4 };

struct ScenarioInfo {
  std::string name;
  std::string description;
};

/// Registered scenarios in a fixed order.
const std::vector<ScenarioInfo>& list_scenarios();

bool is_scenario(const std::string& name);

/// The bundled default configuration.
json default_config();

/// Defaults merged with the user file. Unknown keys or mismatched types
/// throw ConfigError.
json load_config(const std::filesystem::path& file);

/// Strict merge of `user` onto `base`.
void merge_config(json& base, const json& user, const std::string& where = "");

/// Applies "dotted.path=value". The path must already exist; the value is
/// parsed as JSON when possible, otherwise taken as a string.
void apply_override(json& config, const std::string& assignment);

DeviceParams device_from_config(const json& config);
TuningModel tuning_from_config(const json& config);

struct ManifestEntry {
  std::string file;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct Manifest {
  std::string scenario;
  std::vector<ManifestEntry> files;
  json summary;  // headline numbers of the run
  json meta;     // contents of the sidecar
};

/// Runs a scenario and writes every artifact under `out_dir` (created if
/// needed). Nothing is written when the name or configuration is invalid.
Manifest run_scenario(const std::string& name, const json& config,
                      const std::filesystem::path& out_dir);

/// Maps an exception from run_scenario to an exit code.
int exit_code_for(const std::exception& e);

}  // namespace qdswitch::cli
