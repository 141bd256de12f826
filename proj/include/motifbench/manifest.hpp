#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace motifbench {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kManifestFileName = "manifest.json";

// Record of one CLI invocation, written next to its outputs. Every output
// directory holds exactly one. Rerunning a command with the manifest's
// config and seeds reproduces all structural outputs byte for byte (the
// manifest itself carries timestamps and so is not part of that contract).
struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string command;                  // subcommand name
  std::vector<std::string> argv;        // full command line as invoked
  std::string created_utc;              // ISO 8601, UTC
  uint64_t seed = 0;
  nlohmann::json config;                // effective settings after env/flag merge
  std::map<std::string, std::string> inputs;   // path -> content digest
  std::map<std::string, std::string> outputs;  // path -> content digest
};

// FNV-1a 64 over the file bytes, as 16 hex digits. IoError if unreadable.
std::string file_digest(const std::string& path);

nlohmann::json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

// Writes <out_dir>/manifest.json (creating out_dir), replacing any previous
// manifest so the directory always holds exactly one.
void save_manifest(const RunManifest& m, const std::string& out_dir);

// Accepts either the manifest file itself or a directory containing one.
RunManifest load_manifest(const std::string& path);

}  // namespace motifbench
