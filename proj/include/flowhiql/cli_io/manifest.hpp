#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

namespace flowhiql {

/// Provenance record written as manifest.json into every output directory.
struct RunManifest {
  std::string command;
  std::string version = FLOWHIQL_VERSION;
  std::uint64_t seed = 0;
  std::string config;            // config snapshot (INI text); empty if none
  std::string dataset_checksum;  // CRC-32 of the dataset file; empty if none
  double wall_clock_seconds = 0.0;
  nlohmann::json final_metrics = nlohmann::json::object();
  nlohmann::json parameters = nlohmann::json::object();  // command flags
  std::map<std::string, std::string> files;              // file name -> CRC-32

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

/// CRC-32 of a file as 8 lowercase hex digits.
std::string crc32_file(const std::filesystem::path& path);
std::string crc32_bytes(const std::string& bytes);

/// Records the checksum of every listed file (relative to `dir`) and writes
/// dir/manifest.json.
void write_manifest(const std::filesystem::path& dir, RunManifest manifest);
RunManifest read_manifest(const std::filesystem::path& dir);

}  // namespace flowhiql
