#pragma once

#include <filesystem>
#include <string>

#include "flowhiql/hier_policy/train_config.hpp"

namespace flowhiql {

/// INI text with sections [run] [hiql] [optim] [relabel] [network] [eval].
/// Missing keys keep their defaults; unknown sections or keys, malformed
/// values and out-of-range settings raise ConfigError.
TrainConfig parse_config(const std::string& text, const std::string& origin = "<memory>");
TrainConfig load_config(const std::filesystem::path& path);

/// Canonical text listing every key; parse_config(write_config(c)) == c.
std::string write_config(const TrainConfig& config);
void save_config(const std::filesystem::path& path, const TrainConfig& config);

}  // namespace flowhiql
