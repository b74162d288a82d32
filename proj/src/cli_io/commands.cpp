#include "flowhiql/cli_io/commands.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "flowhiql/cli_io/config_file.hpp"
#include "flowhiql/cli_io/manifest.hpp"
#include "flowhiql/cli_io/metrics_csv.hpp"
#include "flowhiql/cli_io/report.hpp"
#include "flowhiql/envs_data/dataset.hpp"
#include "flowhiql/envs_data/evaluate.hpp"
#include "flowhiql/errors.hpp"
#include "flowhiql/flow_core/coupling_flow.hpp"
#include "flowhiql/format.hpp"
#include "flowhiql/hier_policy/agent.hpp"
#include "flowhiql/hier_policy/trainer.hpp"
#include "flowhiql/tensor_nn/checkpoint.hpp"
#include "flowhiql/theory_checks/kl_cap.hpp"

namespace flowhiql {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), "cannot create directory: " + ec.message());
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
  if (!out) throw IoError(path.string(), "write failed");
}

nlohmann::json metrics_json(const MetricsRow& r) {
  return {{"step", r.step},
          {"loss_v", r.loss_v},
          {"loss_h", r.loss_h},
          {"loss_l", r.loss_l},
          {"success_rate", r.success_rate}};
}

std::string checkpoint_name(std::size_t step) { return "step_" + std::to_string(step) + ".ckpt"; }

}  // namespace

int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ArgumentError& e) {
    err << "argument error: " << e.what() << "\n";
    return kExitArgument;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitArgument;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  }
}

fs::path default_output_dir(const std::string& command) {
  const char* root = std::getenv("FLOWHIQL_OUTPUT_ROOT");
  return fs::path(root && *root ? root : "runs") / command;
}

void cmd_gen_data(const GenDataOptions& options, std::ostream& log) {
  const auto start = Clock::now();
  if (options.n_traj == 0) throw ArgumentError("--n-traj must be at least 1");
  const auto env = make_env(options.env);
  const OfflineDataset ds = generate_dataset(*env, options.n_traj, options.seed);
  make_dir(options.out);
  save_dataset(options.out / "dataset.bin", ds);

  RunManifest m;
  m.command = "gen-data";
  m.seed = options.seed;
  m.dataset_checksum = crc32_file(options.out / "dataset.bin");
  m.parameters = {{"env", env->descriptor()}, {"n_traj", options.n_traj}, {"seed", options.seed}};
  m.final_metrics = {{"trajectories", ds.trajectories.size()},
                     {"transitions", ds.transition_count()}};
  m.files["dataset.bin"];
  m.wall_clock_seconds = seconds_since(start);
  write_manifest(options.out, m);
  log << "wrote " << ds.trajectories.size() << " trajectories (" << ds.transition_count()
      << " transitions) to " << (options.out / "dataset.bin").string() << "\n";
}

void cmd_train(const TrainOptions& options, std::ostream& log) {
  const auto start = Clock::now();
  TrainConfig config = load_config(options.config);
  if (options.dataset_fraction) config.dataset_fraction = *options.dataset_fraction;
  if (options.family) config.family = *options.family;
  if (options.seed) config.seed = *options.seed;
  if (options.steps) config.steps = *options.steps;
  try {
    config.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }

  const auto env = make_env(config.env);
  const OfflineDataset full = load_dataset(options.data);
  if (full.env != env->descriptor()) {
    throw ConfigError("dataset was generated for '" + full.env + "' but the config trains '" +
                      env->descriptor() + "'");
  }
  check_dataset_env(full, *env);
  const OfflineDataset ds = apply_fraction(full, config.dataset_fraction);
  Trainer trainer(config, ds, *env);

  std::vector<MetricsRow> previous;
  if (options.resume) {
    trainer.restore(load_checkpoint(*options.resume));
    const fs::path source = find_run_config(*options.resume).parent_path() / "metrics.csv";
    for (const auto& r : read_metrics_csv(source)) {
      if (r.step <= trainer.step()) previous.push_back(r);
    }
    log << "resumed at step " << trainer.step() << "\n";
  }

  make_dir(options.out / "checkpoints");
  save_config(options.out / "config.ini", config);
  MetricsWriter metrics(options.out / "metrics.csv");
  for (const auto& r : previous) metrics.append(r);
  std::vector<MetricsRow> rows = previous;
  trainer.run(
      [&](const MetricsRow& row) {
        metrics.append(row);
        rows.push_back(row);
        log << "step " << row.step << "  loss_v " << fmt(row.loss_v) << "  loss_h "
            << fmt(row.loss_h) << "  loss_l " << fmt(row.loss_l) << "  success "
            << fmt(row.success_rate) << "\n";
      },
      [&](std::size_t step) {
        save_checkpoint(options.out / "checkpoints" / checkpoint_name(step), trainer.snapshot());
      });
  save_checkpoint(options.out / "final.ckpt", trainer.snapshot());

  RunManifest m;
  m.command = "train";
  m.seed = config.seed;
  m.config = write_config(config);
  m.dataset_checksum = crc32_file(options.data);
  m.parameters = {{"family", config.family},
                  {"dataset_fraction", config.dataset_fraction},
                  {"trajectories", ds.trajectories.size()},
                  {"steps", config.steps},
                  {"resumed_from_step", options.resume ? nlohmann::json(previous.empty() ? 0 : previous.back().step)
                                                       : nlohmann::json(nullptr)}};
  if (!rows.empty()) m.final_metrics = metrics_json(rows.back());
  m.files["config.ini"];
  m.files["metrics.csv"];
  m.files["final.ckpt"];
  m.wall_clock_seconds = seconds_since(start);
  write_manifest(options.out, m);
}

fs::path find_run_config(const fs::path& checkpoint) {
  const fs::path dir = checkpoint.parent_path();
  for (const fs::path& candidate : {dir / "config.ini", dir.parent_path() / "config.ini"}) {
    if (fs::exists(candidate)) return candidate;
  }
  throw IoError(checkpoint.string(), "no config.ini beside the checkpoint; pass --config");
}

std::vector<std::vector<double>> read_goals(const fs::path& path, std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open goals file");
  std::vector<std::vector<double>> goals;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = line.substr(0, line.find('#'));
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream fields(line);
    std::vector<double> g;
    std::string tok;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        g.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw IoError(path.string(), "line " + std::to_string(lineno) + ": bad number '" + tok + "'");
      }
    }
    if (g.empty()) continue;
    if (g.size() != dim) {
      throw ConfigError(path.string() + " line " + std::to_string(lineno) + ": expected " +
                        std::to_string(dim) + " values, got " + std::to_string(g.size()));
    }
    goals.push_back(std::move(g));
  }
  if (goals.empty()) throw ArgumentError(path.string() + " lists no goals");
  return goals;
}

void cmd_eval(const EvalOptions& options, std::ostream& log) {
  const auto start = Clock::now();
  if (options.episodes == 0 || options.seeds == 0) {
    throw ArgumentError("--episodes and --seeds must be at least 1");
  }
  const fs::path config_path = options.config ? *options.config : find_run_config(options.checkpoint);
  const TrainConfig config = load_config(config_path);
  const auto env = make_env(options.env ? *options.env : config.env);
  if (env->descriptor() != make_env(config.env)->descriptor()) {
    throw ConfigError("--env " + env->descriptor() + " does not match the run's env " + config.env);
  }
  const ParamStore snapshot = load_checkpoint(options.checkpoint);
  const PolicyPair policies = load_policies(config, *env, snapshot);
  const auto goals = options.goals ? read_goals(*options.goals, env->state_dim())
                                   : env->eval_goals(config.eval_goals);

  std::vector<EvalResult> runs;
  std::string csv = "seed,goal,success_rate\n";
  for (std::size_t i = 0; i < options.seeds; ++i) {
    const std::uint64_t seed = options.seed + i;
    Random rng(seed, 0);
    HierarchicalAgent agent(policies.high, policies.low, config.k, config.eval_high_noise,
                            config.eval_low_noise);
    runs.push_back(evaluate(agent, *env, goals, options.episodes, rng));
    for (std::size_t j = 0; j < goals.size(); ++j) {
      csv += std::to_string(seed) + "," + std::to_string(j) + "," + fmt(runs.back().per_goal[j]) + "\n";
    }
  }
  const SeedSummary summary = summarize_seeds(runs);

  std::ostringstream txt;
  txt << "checkpoint: " << options.checkpoint.filename().string() << "\n";
  txt << "env: " << env->descriptor() << ", family: " << config.family << "\n";
  txt << "goals: " << goals.size() << ", episodes per goal: " << options.episodes
      << ", seeds: " << options.seeds << "\n";
  txt << "success rate: " << fmt(summary.mean) << " (std err " << fmt(summary.std_err) << ")\n";
  for (std::size_t j = 0; j < goals.size(); ++j) {
    txt << "  goal " << j << ":";
    for (double v : goals[j]) txt << " " << fmt(v);
    txt << "  success " << fmt(summary.per_goal[j]) << "\n";
  }

  make_dir(options.out);
  write_file(options.out / "eval.csv", csv);
  write_file(options.out / "eval.txt", txt.str());
  RunManifest m;
  m.command = "eval";
  m.seed = options.seed;
  m.config = write_config(config);
  m.parameters = {{"checkpoint_checksum", crc32_file(options.checkpoint)},
                  {"env", env->descriptor()},
                  {"goals", goals.size()},
                  {"episodes", options.episodes},
                  {"seeds", options.seeds}};
  m.final_metrics = {{"success_rate", summary.mean}, {"std_err", summary.std_err}};
  m.files["eval.csv"];
  m.files["eval.txt"];
  m.wall_clock_seconds = seconds_since(start);
  write_manifest(options.out, m);
  log << txt.str();
}

bool cmd_verify(const VerifyOptions& options, std::ostream& log) {
  const auto start = Clock::now();
  if (options.contexts == 0) throw ArgumentError("--contexts must be at least 1");
  TrainConfig config;
  if (options.config) {
    config = load_config(*options.config);
  } else if (options.checkpoint) {
    config = load_config(find_run_config(*options.checkpoint));
  } else {
    config.env = options.env;
  }
  if (config.family != "flow") throw ConfigError("only flow policies have a certified bound");
  const auto env = make_env(config.env);
  Random init(config.seed, 0);
  PolicyHead high("flow", "high", env->state_dim(), 2 * env->state_dim(), config, init);
  PolicyHead low("flow", "low", env->action_dim(), 2 * env->state_dim(), config, init);
  if (options.checkpoint) {
    PolicyPair loaded = load_policies(config, *env, load_checkpoint(*options.checkpoint));
    high = std::move(loaded.high);
    low = std::move(loaded.low);
  }
  const auto& high_flow = dynamic_cast<const ConditionalFlow&>(high.density());
  const auto& low_flow = dynamic_cast<const ConditionalFlow&>(low.density());

  Random rng(options.seed, 0);
  const auto n_ctx = static_cast<Eigen::Index>(options.contexts);
  const auto sd = static_cast<Eigen::Index>(env->state_dim());
  Matrix high_ctx(n_ctx, 2 * sd);
  Matrix low_ctx(n_ctx, 2 * sd);
  Matrix actions(n_ctx, static_cast<Eigen::Index>(env->action_dim()));
  std::optional<OfflineDataset> ds;
  if (options.data) {
    ds = load_dataset(*options.data);
    const BatchSampler sampler(*ds, *env, config.relabel());
    const HighBatch hb = sampler.high_batch(rng, options.contexts, config.k);
    const LowBatch lb = sampler.low_batch(rng, options.contexts, config.k);
    high_ctx = concat_rows(hb.s, hb.g);
    low_ctx = concat_rows(lb.s, lb.s_k);
    actions = lb.a;
  } else {
    for (Eigen::Index i = 0; i < high_ctx.size(); ++i) high_ctx.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < low_ctx.size(); ++i) low_ctx.data()[i] = rng.normal();
  }

  const double a_max_low = std::sqrt(static_cast<double>(env->action_dim()));
  const BoundReport high_report =
      check_lower_bound(high_flow, high.params(), high_ctx, options.samples, env->state_norm_bound(), rng);
  const BoundReport low_report =
      check_lower_bound(low_flow, low.params(), low_ctx, options.samples, a_max_low, rng);

  std::string kl_csv = kl_csv_header() + "\n";
  bool kl_ok = true;
  const std::size_t per_context = std::max<std::size_t>(2, options.samples / options.contexts);
  for (Eigen::Index i = 0; i < n_ctx; ++i) {
    const auto ctx = low_ctx.row(i);
    const std::span<const double> c(ctx.data(), static_cast<std::size_t>(ctx.size()));
    UniformBallBehavior behavior =
        ds ? dataset_kernel(std::span<const double>(actions.row(i).data(), actions.cols()), 0.2, a_max_low)
           : UniformBallBehavior(env->action_dim(), a_max_low);
    const KlEstimate kl = kl_cap_check(behavior, low_flow, low.params(), c, per_context, rng, a_max_low);
    kl_ok = kl_ok && kl.within_bound();
    kl_csv += kl_csv_row("low.context" + std::to_string(i), kl) + "\n";
  }

  const bool ok = high_report.valid() && low_report.valid() && kl_ok;
  const std::string text = "high-level policy\n" + format_bound_report(high_report) +
                           "low-level policy\n" + format_bound_report(low_report) +
                           "KL against capped behavior: " + (kl_ok ? "ok" : "VIOLATED") +
                           " (" + std::to_string(options.contexts) + " contexts)\n" +
                           "overall: " + (ok ? "PASS" : "FAIL") + "\n";
  make_dir(options.out);
  write_file(options.out / "bounds.txt", text);
  write_file(options.out / "bounds.csv", bound_csv_header() + "\n" + bound_csv_row("high", high_report) +
                                             "\n" + bound_csv_row("low", low_report) + "\n");
  write_file(options.out / "kl.csv", kl_csv);

  RunManifest m;
  m.command = "verify";
  m.seed = options.seed;
  m.config = write_config(config);
  if (options.data) m.dataset_checksum = crc32_file(*options.data);
  m.parameters = {{"checkpoint", options.checkpoint ? crc32_file(*options.checkpoint) : "fresh-init"},
                  {"samples", options.samples},
                  {"contexts", options.contexts}};
  m.final_metrics = {{"high_u_max", high_report.u_max}, {"high_B", high_report.B},
                     {"high_margin", high_report.margin}, {"low_u_max", low_report.u_max},
                     {"low_B", low_report.B}, {"low_margin", low_report.margin},
                     {"kl_within_bound", kl_ok}, {"pass", ok}};
  m.files["bounds.txt"];
  m.files["bounds.csv"];
  m.files["kl.csv"];
  m.wall_clock_seconds = seconds_since(start);
  write_manifest(options.out, m);
  log << text;
  return ok;
}

void cmd_report(const ReportOptions& options, std::ostream& log) {
  const auto start = Clock::now();
  if (options.inputs.empty()) throw ArgumentError("report needs at least one input");
  std::vector<RunRecord> runs;
  for (const auto& in : options.inputs) {
    runs.push_back(load_run(fs::is_directory(in) ? in / "metrics.csv" : in));
  }
  const auto groups = summarize_runs(runs);
  const std::string table = format_table(groups);
  make_dir(options.out);
  write_file(options.out / "table.txt", table);
  write_file(options.out / "summary.csv", summary_csv(groups));
  write_file(options.out / "merged.csv", merged_csv(runs));
  RunManifest m;
  m.command = "report";
  nlohmann::json sources = nlohmann::json::array();
  for (const auto& r : runs) sources.push_back(crc32_file(r.source));
  m.parameters = {{"inputs", options.inputs.size()}, {"input_checksums", sources}};
  m.files["table.txt"];
  m.files["summary.csv"];
  m.files["merged.csv"];
  m.wall_clock_seconds = seconds_since(start);
  write_manifest(options.out, m);
  log << table;
}

}  // namespace flowhiql
