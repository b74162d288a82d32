// flowhiql command-line entry point.

#include <CLI11.hpp>
#include <iostream>

#include "flowhiql/cli_io/commands.hpp"

using namespace flowhiql;

int main(int argc, char** argv) {
  CLI::App app{"Offline hierarchical goal-conditioned RL with normalizing-flow policies"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FLOWHIQL_VERSION);

  GenDataOptions gen;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate an offline dataset");
  gen_cmd->add_option("--env", gen.env, "chain, chain:<n>, point_maze or two_corridor")
      ->capture_default_str();
  gen_cmd->add_option("--n-traj", gen.n_traj, "Number of trajectories")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Generation seed")->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "Output directory");

  TrainOptions train;
  std::string train_out;
  double fraction = 0.0;
  std::string family;
  std::uint64_t train_seed = 0;
  std::size_t steps = 0;
  std::string resume;
  auto* train_cmd = app.add_subcommand("train", "Train value function and policies");
  train_cmd->add_option("--config", train.config, "Config file (INI)")->required();
  train_cmd->add_option("--data", train.data, "Dataset file")->required();
  auto* frac_opt = train_cmd->add_option("--dataset-fraction", fraction, "Keep this fraction of trajectories");
  auto* fam_opt = train_cmd->add_option("--policy-family", family, "flow or gaussian");
  auto* seed_opt = train_cmd->add_option("--seed", train_seed, "Override the config seed");
  auto* steps_opt = train_cmd->add_option("--steps", steps, "Override the step budget");
  auto* resume_opt = train_cmd->add_option("--resume", resume, "Checkpoint to resume from");
  train_cmd->add_option("--out", train_out, "Output directory");

  EvalOptions eval;
  std::string eval_out, eval_config, eval_env, eval_goals;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Checkpoint file")->required();
  auto* eval_cfg_opt = eval_cmd->add_option("--config", eval_config, "Run config (default: beside checkpoint)");
  auto* eval_env_opt = eval_cmd->add_option("--env", eval_env, "Environment (must match the config)");
  auto* eval_goals_opt = eval_cmd->add_option("--goals", eval_goals, "Goals file, one goal per line");
  eval_cmd->add_option("--episodes", eval.episodes, "Episodes per goal")->capture_default_str();
  eval_cmd->add_option("--seed", eval.seed, "First evaluation seed")->capture_default_str();
  eval_cmd->add_option("--seeds", eval.seeds, "Number of evaluation seeds")->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "Output directory");

  VerifyOptions verify;
  std::string verify_out, verify_ckpt, verify_config, verify_data;
  auto* verify_cmd = app.add_subcommand("verify", "Check the density lower bound and KL cap");
  auto* v_ckpt = verify_cmd->add_option("--checkpoint", verify_ckpt, "Checkpoint (default: fresh init)");
  auto* v_cfg = verify_cmd->add_option("--config", verify_config, "Run config");
  auto* v_data = verify_cmd->add_option("--data", verify_data, "Dataset for contexts and behavior kernels");
  verify_cmd->add_option("--env", verify.env, "Environment when no config is given")->capture_default_str();
  verify_cmd->add_option("--samples", verify.samples, "Actions per audit")->capture_default_str();
  verify_cmd->add_option("--contexts", verify.contexts, "Contexts per audit")->capture_default_str();
  verify_cmd->add_option("--seed", verify.seed, "Audit seed")->capture_default_str();
  verify_cmd->add_option("--out", verify_out, "Output directory");

  ReportOptions report;
  std::vector<std::string> inputs;
  std::string report_out;
  auto* report_cmd = app.add_subcommand("report", "Aggregate metrics across runs");
  report_cmd->add_option("inputs", inputs, "Metrics CSVs or run directories")->required();
  report_cmd->add_option("--out", report_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  auto out_dir = [](const std::string& flag, const char* name) {
    return flag.empty() ? default_output_dir(name) : std::filesystem::path(flag);
  };

  return run_guarded(
      [&]() -> int {
        if (*gen_cmd) {
          gen.out = out_dir(gen_out, "gen-data");
          cmd_gen_data(gen, std::cout);
        } else if (*train_cmd) {
          train.out = out_dir(train_out, "train");
          if (*frac_opt) train.dataset_fraction = fraction;
          if (*fam_opt) train.family = family;
          if (*seed_opt) train.seed = train_seed;
          if (*steps_opt) train.steps = steps;
          if (*resume_opt) train.resume = resume;
          cmd_train(train, std::cout);
        } else if (*eval_cmd) {
          eval.out = out_dir(eval_out, "eval");
          if (*eval_cfg_opt) eval.config = eval_config;
          if (*eval_env_opt) eval.env = eval_env;
          if (*eval_goals_opt) eval.goals = eval_goals;
          cmd_eval(eval, std::cout);
        } else if (*verify_cmd) {
          verify.out = out_dir(verify_out, "verify");
          if (*v_ckpt) verify.checkpoint = verify_ckpt;
          if (*v_cfg) verify.config = verify_config;
          if (*v_data) verify.data = verify_data;
          return cmd_verify(verify, std::cout) ? kExitOk : kExitVerification;
        } else if (*report_cmd) {
          report.out = out_dir(report_out, "report");
          for (const auto& in : inputs) report.inputs.emplace_back(in);
          cmd_report(report, std::cout);
        }
        return kExitOk;
      },
      std::cerr);
}
