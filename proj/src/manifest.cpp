#include "motifbench/manifest.hpp"

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "motifbench/errors.hpp"

namespace motifbench {
namespace {

std::string now_utc_iso8601() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <typename T>
T require(const nlohmann::json& j, const char* key) {
  if (!j.contains(key))
    throw ParseError(std::string("manifest missing field: ") + key);
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest field '") + key + "': " + e.what());
  }
}

}  // namespace

std::string file_digest(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for digest: " + path);
  uint64_t h = 1469598103934665603ull;
  char buf[1 << 16];
  while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
    const std::streamsize n = f.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (!f) break;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

nlohmann::json manifest_to_json(const RunManifest& m) {
  nlohmann::json j;
  j["tool_version"] = m.tool_version;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["created_utc"] = m.created_utc;
  j["seed"] = m.seed;
  j["config"] = m.config;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  return j;
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  m.tool_version = require<std::string>(j, "tool_version");
  m.command = require<std::string>(j, "command");
  m.argv = require<std::vector<std::string>>(j, "argv");
  m.created_utc = require<std::string>(j, "created_utc");
  m.seed = require<uint64_t>(j, "seed");
  if (!j.contains("config")) throw ParseError("manifest missing field: config");
  m.config = j.at("config");
  m.inputs = require<std::map<std::string, std::string>>(j, "inputs");
  m.outputs = require<std::map<std::string, std::string>>(j, "outputs");
  return m;
}

void save_manifest(const RunManifest& m, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir);
  RunManifest stamped = m;
  if (stamped.created_utc.empty()) stamped.created_utc = now_utc_iso8601();
  const std::string path =
      (std::filesystem::path(out_dir) / kManifestFileName).string();
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f << manifest_to_json(stamped).dump(2) << '\n';
  if (!f) throw IoError("write failed: " + path);
}

RunManifest load_manifest(const std::string& path) {
  std::filesystem::path p(path);
  std::error_code ec;
  if (std::filesystem::is_directory(p, ec)) p /= kManifestFileName;
  std::ifstream f(p);
  if (!f) throw IoError("cannot open manifest: " + p.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest " + p.string() + ": " + e.what());
  }
  return manifest_from_json(j);
}

}  // namespace motifbench
