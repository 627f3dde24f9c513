#include "ratio_cli/manifest.hpp"

#include "ratio/error.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>

namespace ratio::cli {

using nlohmann::json;

json to_json(const RunManifest &m) {
  json j{{"schema_version", RunManifest::kSchemaVersion},
         {"tool_version", m.tool_version},
         {"config_hash", m.config_hash},
         {"seed", m.seed},
         {"config", m.config},
         {"artifacts", m.artifacts},
         {"timestamps", m.timestamps}};
  j["temperature"] = m.temperature ? json(*m.temperature) : json(nullptr);
  return j;
}

RunManifest manifest_from_json(const json &j, const std::string &origin) {
  try {
    if (!j.is_object() || !j.contains("schema_version"))
      throw ConfigError(origin + ": not a run manifest (no schema_version)");
    const int version = j.at("schema_version").get<int>();
    if (version != RunManifest::kSchemaVersion)
      throw ConfigError(origin + ": manifest schema_version " + std::to_string(version) +
                        " is not supported (expected " + std::to_string(RunManifest::kSchemaVersion) + ")");
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = j.at("config");
    m.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
    m.timestamps = j.at("timestamps").get<std::map<std::string, std::string>>();
    if (j.contains("temperature") && !j.at("temperature").is_null())
      m.temperature = j.at("temperature").get<double>();
    return m;
  } catch (const json::exception &e) {
    throw ConfigError(origin + ": malformed manifest: " + e.what());
  }
}

RunManifest load_manifest(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open manifest");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error &e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return manifest_from_json(j, path.string());
}

void save_manifest(const std::filesystem::path &path, const RunManifest &m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << to_json(m).dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string utc_timestamp() {
  std::time_t t = 0;
  if (const char *sde = std::getenv("SOURCE_DATE_EPOCH"); sde && *sde)
    t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
  else
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool is_manifest(const json &doc) {
  return doc.is_object() && doc.contains("config_hash") && doc.contains("artifacts");
}

} // namespace ratio::cli
