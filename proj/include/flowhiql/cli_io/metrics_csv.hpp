#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "flowhiql/hier_policy/trainer.hpp"

namespace flowhiql {

inline constexpr const char* kMetricsHeader = "step,loss_v,loss_h,loss_l,success_rate";

std::string metrics_csv_line(const MetricsRow& row);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);

/// Reads a metrics CSV. Header names are matched after trimming and
/// lowercasing, in any column order; extra columns are ignored.
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);
std::vector<MetricsRow> parse_metrics_csv(const std::string& text, const std::string& origin);

/// Writes the header on construction and flushes every appended row.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::filesystem::path& path);
  void append(const MetricsRow& row);

 private:
  std::filesystem::path path_;
};

}  // namespace flowhiql
