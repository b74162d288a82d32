#include "flowhiql/cli_io/report.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

#include "flowhiql/cli_io/config_file.hpp"
#include "flowhiql/cli_io/metrics_csv.hpp"
#include "flowhiql/errors.hpp"
#include "flowhiql/format.hpp"

namespace flowhiql {

RunRecord load_run(const std::filesystem::path& metrics_csv) {
  RunRecord run;
  run.source = metrics_csv.string();
  run.rows = read_metrics_csv(metrics_csv);
  const auto cfg_path = metrics_csv.parent_path() / "config.ini";
  if (std::filesystem::exists(cfg_path)) {
    const TrainConfig cfg = load_config(cfg_path);
    run.env = cfg.env;
    run.family = cfg.family;
    run.fraction = cfg.dataset_fraction;
    run.seed = cfg.seed;
  }
  return run;
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::vector<GroupSummary> summarize_runs(const std::vector<RunRecord>& runs) {
  if (runs.empty()) throw ArgumentError("report needs at least one run");
  using Key = std::tuple<std::string, std::string, double>;
  std::map<Key, std::vector<const RunRecord*>> groups;
  for (const auto& r : runs) groups[{r.env, r.family, r.fraction}].push_back(&r);

  std::vector<GroupSummary> out;
  std::map<std::pair<std::string, std::string>, double> full_mean;
  for (const auto& [key, members] : groups) {
    GroupSummary g;
    std::tie(g.env, g.family, g.fraction) = key;
    g.runs = members.size();
    std::vector<double> finals;
    for (const RunRecord* r : members) {
      if (r->rows.empty()) throw ArgumentError(r->source + " has no metrics rows");
      finals.push_back(r->rows.back().success_rate);
      g.final_step = std::max(g.final_step, r->rows.back().step);
    }
    for (double f : finals) g.mean += f / static_cast<double>(finals.size());
    g.std = sample_std(finals);
    if (g.fraction == 1.0) full_mean[{g.env, g.family}] = g.mean;
    out.push_back(g);
  }
  for (auto& g : out) {
    const auto it = full_mean.find({g.env, g.family});
    if (g.fraction < 1.0 && it != full_mean.end()) g.drop = it->second - g.mean;
  }
  return out;
}

std::string format_table(const std::vector<GroupSummary>& groups) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-14s %-9s %8s %5s %18s %9s\n", "env", "family", "fraction",
                "runs", "success (%)", "drop (%)");
  out << line;
  for (const auto& g : groups) {
    char cell[64];
    std::snprintf(cell, sizeof(cell), "%.1f +- %.1f", 100.0 * g.mean, 100.0 * g.std);
    char drop[32] = "-";
    if (g.drop) std::snprintf(drop, sizeof(drop), "%.1f", 100.0 * *g.drop);
    std::snprintf(line, sizeof(line), "%-14s %-9s %8.2f %5zu %18s %9s\n", g.env.c_str(),
                  g.family.c_str(), g.fraction, g.runs, cell, drop);
    out << line;
  }
  return out.str();
}

std::string summary_csv(const std::vector<GroupSummary>& groups) {
  std::string out = "env,family,fraction,runs,final_step,success_mean,success_std,drop\n";
  for (const auto& g : groups) {
    out += g.env + "," + g.family + "," + fmt(g.fraction) + "," + std::to_string(g.runs) + "," +
           std::to_string(g.final_step) + "," + fmt(g.mean) + "," + fmt(g.std) + "," +
           (g.drop ? fmt(*g.drop) : "") + "\n";
  }
  return out;
}

std::string merged_csv(const std::vector<RunRecord>& runs) {
  std::string out = std::string("env,family,fraction,seed,") + kMetricsHeader + "\n";
  for (const auto& r : runs) {
    const std::string prefix =
        r.env + "," + r.family + "," + fmt(r.fraction) + "," + std::to_string(r.seed) + ",";
    for (const auto& row : r.rows) out += prefix + metrics_csv_line(row) + "\n";
  }
  return out;
}

}  // namespace flowhiql
