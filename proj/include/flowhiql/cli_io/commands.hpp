#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace flowhiql {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitArgument = 2,
  kExitIo = 3,
  kExitNumeric = 4,
  kExitVerification = 5,
};

/// Runs `body`, mapping library exceptions to exit codes and printing the
/// message to `err`.
int run_guarded(const std::function<int()>& body, std::ostream& err);

/// Default output directory for a subcommand: $FLOWHIQL_OUTPUT_ROOT/<name>,
/// or runs/<name> when the variable is unset.
std::filesystem::path default_output_dir(const std::string& command);

struct GenDataOptions {
  std::string env = "chain";
  std::size_t n_traj = 100;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};
/// Writes out/dataset.bin and out/manifest.json.
void cmd_gen_data(const GenDataOptions& options, std::ostream& log);

struct TrainOptions {
  std::filesystem::path config;
  std::filesystem::path data;
  std::filesystem::path out;
  std::optional<double> dataset_fraction;
  std::optional<std::string> family;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> steps;
  std::optional<std::filesystem::path> resume;  // checkpoint of an earlier run
};
/// Writes config.ini, metrics.csv, checkpoints/step_<n>.ckpt, final.ckpt and
/// manifest.json into out.
void cmd_train(const TrainOptions& options, std::ostream& log);

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::optional<std::filesystem::path> config;  // default: config.ini beside the run
  std::optional<std::string> env;               // must match the config when given
  std::optional<std::filesystem::path> goals;   // one goal per line
  std::size_t episodes = 1;                     // per goal
  std::uint64_t seed = 0;
  std::size_t seeds = 1;                        // evaluation seeds seed .. seed+seeds-1
  std::filesystem::path out;
};
/// Writes eval.csv, eval.txt and manifest.json into out.
void cmd_eval(const EvalOptions& options, std::ostream& log);

struct VerifyOptions {
  std::optional<std::filesystem::path> checkpoint;  // fresh initialization when absent
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> data;  // contexts and behavior kernels
  std::string env = "chain";                  // used without a config
  std::size_t samples = 100000;
  std::size_t contexts = 16;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};
/// Writes bounds.txt, bounds.csv, kl.csv and manifest.json. Returns true
/// when every certified check passes.
bool cmd_verify(const VerifyOptions& options, std::ostream& log);

struct ReportOptions {
  std::vector<std::filesystem::path> inputs;  // metrics CSVs or run directories
  std::filesystem::path out;
};
/// Writes table.txt, summary.csv, merged.csv and manifest.json.
void cmd_report(const ReportOptions& options, std::ostream& log);

/// Parses a goals file: one goal per line, numbers separated by spaces or
/// commas, '#' starts a comment.
std::vector<std::vector<double>> read_goals(const std::filesystem::path& path, std::size_t dim);

/// config.ini beside a checkpoint or one directory above it.
std::filesystem::path find_run_config(const std::filesystem::path& checkpoint);

}  // namespace flowhiql
