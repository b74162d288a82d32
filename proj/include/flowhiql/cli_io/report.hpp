#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flowhiql/hier_policy/trainer.hpp"

namespace flowhiql {

/// One training run's metrics and the labels it is grouped by.
struct RunRecord {
  std::string env = "unknown";
  std::string family = "unknown";
  double fraction = 1.0;
  std::uint64_t seed = 0;
  std::string source;
  std::vector<MetricsRow> rows;
};

/// Reads a metrics CSV; labels come from config.ini in the same directory
/// when present.
RunRecord load_run(const std::filesystem::path& metrics_csv);

struct GroupSummary {
  std::string env;
  std::string family;
  double fraction = 1.0;
  std::size_t runs = 0;
  double mean = 0.0;  // of each run's final success rate
  double std = 0.0;   // sample standard deviation; 0 for a single run
  std::size_t final_step = 0;
  /// mean at fraction 1.0 minus this mean, when both exist for the
  /// (env, family) pair and this group has fraction < 1.
  std::optional<double> drop;
};

/// Groups by (env, family, fraction) in sorted order.
std::vector<GroupSummary> summarize_runs(const std::vector<RunRecord>& runs);

double sample_std(const std::vector<double>& xs);

std::string format_table(const std::vector<GroupSummary>& groups);
std::string summary_csv(const std::vector<GroupSummary>& groups);
/// Long-format CSV, one line per (run, metrics row).
std::string merged_csv(const std::vector<RunRecord>& runs);

}  // namespace flowhiql
