#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace ratio::cli {

inline constexpr const char *kToolVersion = "0.1.0";
inline constexpr const char *kManifestFile = "manifest.json";

/// Record of a run directory. Artifact paths are relative to the directory
/// holding the manifest; `config` is the normalized experiment config, so
/// any later stage can be re-run from the manifest alone.
struct RunManifest {
  static constexpr int kSchemaVersion = 1;

  std::string config_hash;
  std::uint64_t seed = 0;
  nlohmann::json config;
  std::map<std::string, std::string> artifacts;
  std::optional<double> temperature;
  std::map<std::string, std::string> timestamps; // stage -> UTC ISO-8601
  std::string tool_version = kToolVersion;
};

nlohmann::json to_json(const RunManifest &m);
/// Throws ConfigError naming `origin` on a schema mismatch or missing field.
RunManifest manifest_from_json(const nlohmann::json &j, const std::string &origin);

RunManifest load_manifest(const std::filesystem::path &path);
void save_manifest(const std::filesystem::path &path, const RunManifest &m);

/// UTC time from SOURCE_DATE_EPOCH when set, else the wall clock.
std::string utc_timestamp();

/// True when `doc` looks like a manifest rather than an experiment config.
bool is_manifest(const nlohmann::json &doc);

} // namespace ratio::cli
