#include "flowhiql/cli_io/manifest.hpp"

#include <boost/crc.hpp>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "flowhiql/errors.hpp"

namespace flowhiql {

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["version"] = version;
  j["seed"] = seed;
  j["config"] = config;
  j["dataset_checksum"] = dataset_checksum;
  j["wall_clock_seconds"] = wall_clock_seconds;
  j["final_metrics"] = final_metrics;
  j["parameters"] = parameters;
  j["files"] = files;
  return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = j.at("config").get<std::string>();
    m.dataset_checksum = j.at("dataset_checksum").get<std::string>();
    m.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    m.final_metrics = j.at("final_metrics");
    m.parameters = j.at("parameters");
    m.files = j.at("files").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

std::string crc32_bytes(const std::string& bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08x", static_cast<unsigned>(crc.checksum()));
  return buf;
}

std::string crc32_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for checksum");
  std::ostringstream buf;
  buf << in.rdbuf();
  return crc32_bytes(buf.str());
}

void write_manifest(const std::filesystem::path& dir, RunManifest manifest) {
  for (auto& [name, crc] : manifest.files) crc = crc32_file(dir / name);
  const auto path = dir / "manifest.json";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << manifest.to_json().dump(2) << "\n";
  if (!out) throw IoError(path.string(), "write failed");
}

RunManifest read_manifest(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.json";
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open manifest");
  try {
    return RunManifest::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path.string(), e.what());
  }
}

}  // namespace flowhiql
