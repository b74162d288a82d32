#include "flowhiql/cli_io/metrics_csv.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "flowhiql/errors.hpp"
#include "flowhiql/format.hpp"

namespace flowhiql {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

double to_double(const std::string& s, const std::string& origin) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IoError(origin, "malformed number '" + s + "'");
  }
  return v;
}

void write_text(const std::filesystem::path& path, const std::string& text, bool append) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace

std::string metrics_csv_line(const MetricsRow& row) {
  return std::to_string(row.step) + "," + fmt(row.loss_v) + "," + fmt(row.loss_h) + "," +
         fmt(row.loss_l) + "," + fmt(row.success_rate);
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
  std::string text = std::string(kMetricsHeader) + "\n";
  for (const auto& r : rows) text += metrics_csv_line(r) + "\n";
  write_text(path, text, false);
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError(origin, "empty metrics file");
  auto header = split(line);
  for (auto& h : header) std::transform(h.begin(), h.end(), h.begin(), ::tolower);
  const std::array<const char*, 5> names{"step", "loss_v", "loss_h", "loss_l", "success_rate"};
  std::array<std::size_t, 5> col{};
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto it = std::find(header.begin(), header.end(), names[i]);
    if (it == header.end()) throw IoError(origin, std::string("missing column ") + names[i]);
    col[i] = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() < header.size()) throw IoError(origin, "short row '" + line + "'");
    MetricsRow r;
    const double step = to_double(cells[col[0]], origin);
    if (step < 0 || step != static_cast<double>(static_cast<std::size_t>(step))) {
      throw IoError(origin, "step must be a non-negative integer");
    }
    r.step = static_cast<std::size_t>(step);
    r.loss_v = to_double(cells[col[1]], origin);
    r.loss_h = to_double(cells[col[2]], origin);
    r.loss_l = to_double(cells[col[3]], origin);
    r.success_rate = to_double(cells[col[4]], origin);
    rows.push_back(r);
  }
  return rows;
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open metrics file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_metrics_csv(buf.str(), path.string());
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path) : path_(path) {
  write_text(path_, std::string(kMetricsHeader) + "\n", false);
}

void MetricsWriter::append(const MetricsRow& row) {
  write_text(path_, metrics_csv_line(row) + "\n", true);
}

}  // namespace flowhiql
