// Acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance [--criterion N] [--work DIR]

#include <sys/wait.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "fixtures.hpp"
#include "flowhiql/cli_io/config_file.hpp"
#include "flowhiql/envs_data/dataset.hpp"
#include "flowhiql/envs_data/evaluate.hpp"
#include "flowhiql/envs_data/point_maze.hpp"
#include "flowhiql/errors.hpp"
#include "flowhiql/flow_core/weighted_nll.hpp"
#include "flowhiql/hier_policy/agent.hpp"
#include "flowhiql/hier_policy/policy_updates.hpp"
#include "flowhiql/hier_policy/trainer.hpp"
#include "flowhiql/tensor_nn/adam.hpp"
#include "flowhiql/theory_checks/bounds.hpp"
#include "flowhiql/theory_checks/kl_cap.hpp"
#include "flowhiql/value_learner/value_function.hpp"
#include "oracles.hpp"

using namespace flowhiql;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

std::string num(double x, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << x;
  return s.str();
}

// Offline dataset sizes for the trained-agent criteria.
constexpr std::size_t kChainTrajectories = 200;
constexpr std::size_t kMazeTrajectories = 300;
constexpr std::size_t kCorridorTrajectories = 200;
constexpr std::size_t kSeeds = 5;

// 1. Flow exactness -------------------------------------------------------

void flow_exactness(Outcome& out) {
  double round_trip = 0.0;
  double antisym = 0.0;
  for (const auto& [dim, ctx] : {std::pair<std::size_t, std::size_t>{2, 3}, {4, 8}, {5, 2}}) {
    auto f = fixture::make_flow(fixture::small_flow_config(dim, ctx), 100 + dim, true);
    Random rng(dim);
    const Matrix x = fixture::normal_matrix(10000, static_cast<Eigen::Index>(dim), rng, 2.0);
    const Matrix c = fixture::normal_matrix(10000, static_cast<Eigen::Index>(ctx), rng);
    const FlowResult inv = f.flow->inverse(f.params, x, c);
    const FlowResult fwd = f.flow->forward(f.params, inv.value, c);
    round_trip = std::max(round_trip, (fwd.value - x).cwiseAbs().maxCoeff());
    antisym = std::max(antisym, (fwd.log_det + inv.log_det).cwiseAbs().maxCoeff());
  }
  out.detail << "round trip " << num(round_trip) << ", log-det antisymmetry " << num(antisym);
  out.require(round_trip < 1e-6, "round trip");
  out.require(antisym < 1e-8, "antisymmetry");

  double worst_mass = 1.0;
  double best_mass = 0.0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    fixture::FlowFixture f = fixture::make_flow(fixture::small_flow_config(2, 2), 200 + seed, false);
    Random rng(300 + seed);
    fixture::randomize_flow(*f.flow, f.params, rng, 0.2);
    const Matrix ctx = fixture::normal_matrix(1, 2, rng);
    const int m = 600;
    const double lo = -12.0, hi = 12.0, h = (hi - lo) / m;
    Matrix grid(m * m, 2);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) grid.row(i * m + j) << lo + (i + 0.5) * h, lo + (j + 0.5) * h;
    }
    const Matrix c = ctx.replicate(m * m, 1);
    const double mass = f.flow->log_prob(f.params, grid, c).array().exp().sum() * h * h;
    worst_mass = std::min(worst_mass, mass);
    best_mass = std::max(best_mass, mass);
  }
  out.detail << ", quadrature mass in [" << num(worst_mass) << ", " << num(best_mass) << "]";
  out.require(worst_mass >= 0.98 && best_mass <= 1.02, "quadrature mass");

  double jac_err = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto f = fixture::make_flow(fixture::small_flow_config(4, 3), 400 + seed, true);
    Random rng(500 + seed);
    const Matrix c = fixture::normal_matrix(1, 3, rng);
    const Matrix u = fixture::normal_matrix(1, 4, rng);
    const auto map = [&](const std::vector<double>& v) {
      return fixture::to_vector(f.flow->forward(f.params, fixture::row(v), c).value);
    };
    const double fd = oracle::log_abs_det(oracle::fd_jacobian(map, fixture::to_vector(u)));
    jac_err = std::max(jac_err, std::abs(fd - f.flow->forward(f.params, u, c).log_det(0)));
  }
  out.detail << ", FD Jacobian log-det error " << num(jac_err);
  out.require(jac_err < 1e-4, "Jacobian");
}

// 2. Gradients -------------------------------------------------------------

double grad_p95(const std::vector<double>& analytic, const std::vector<double>& fd) {
  return oracle::percentile(oracle::relative_errors(analytic, fd), 0.95);
}

void gradients(Outcome& out) {
  ChainEnv env(5);
  const OfflineDataset ds = generate_dataset(env, 50, 7);
  BatchSampler sampler(ds, env);
  TrainConfig cfg;
  cfg.policy_hidden = {32, 32};
  double worst_v = 0.0, worst_h = 0.0, worst_l = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Random rng(seed, 1);
    ValueFunction vf(2, {32, 32}, rng);
    for (auto& w : vf.target().flat()) w += 0.1 * rng.normal();
    const ValueBatch vb = sampler.value_batch(rng, 32);
    const ValueUpdateOptions vopt{0.7, 0.99, 0.005, 10.0};
    const auto vg = value_loss_and_grad(vf, vb, vopt);
    const auto vfd = oracle::fd_gradient(
        [&](const ParamStore&) { return value_loss_and_grad(vf, vb, vopt).value; }, vf.online());
    worst_v = std::max(worst_v, grad_p95(vg.grad, vfd));

    PolicyHead high("flow", "high", 2, 4, cfg, rng);
    PolicyHead low("flow", "low", 2, 4, cfg, rng);
    fixture::randomize_flow(dynamic_cast<const ConditionalFlow&>(high.density()), high.params(), rng);
    fixture::randomize_flow(dynamic_cast<const ConditionalFlow&>(low.density()), low.params(), rng);
    const auto hb = high_weighted_batch(vf, sampler.high_batch(rng, 32, 5), 3.0, 100.0);
    const auto lb = low_weighted_batch(vf, sampler.low_batch(rng, 32, 5), 3.0, 100.0);
    const auto hg = weighted_nll_value_and_grad(high.density(), high.params(), hb);
    const auto hfd = oracle::fd_gradient(
        [&](const ParamStore& p) { return weighted_nll_loss(high.density(), p, hb); }, high.params());
    worst_h = std::max(worst_h, grad_p95(hg.grad, hfd));
    const auto lg = weighted_nll_value_and_grad(low.density(), low.params(), lb);
    const auto lfd = oracle::fd_gradient(
        [&](const ParamStore& p) { return weighted_nll_loss(low.density(), p, lb); }, low.params());
    worst_l = std::max(worst_l, grad_p95(lg.grad, lfd));
  }
  out.detail << "worst p95 relative error: value " << num(worst_v) << ", high NLL "
             << num(worst_h) << ", low NLL " << num(worst_l);
  out.require(worst_v < 1e-4, "value loss");
  out.require(worst_h < 1e-4, "high NLL");
  out.require(worst_l < 1e-4, "low NLL");
}

// 3. Density lower bound ---------------------------------------------------

void lower_bound(Outcome& out) {
  struct Example {
    std::size_t d;
    std::vector<LayerBound> layers;
  };
  const std::vector<Example> examples{
      {2, {}}, {2, {{1, 0.0, 0.5}}}, {2, std::vector<LayerBound>(4, LayerBound{1, 3.0, 5.0})}};
  for (const auto& ex : examples) {
    std::vector<double> dl, s, t;
    for (const auto& l : ex.layers) {
      dl.push_back(static_cast<double>(l.d));
      s.push_back(l.S);
      t.push_back(l.T);
    }
    const auto ref = oracle::density_bound_constants(static_cast<double>(ex.d), dl, s, t, 1.0);
    const auto got = bound_constants(ex.d, ex.layers, 1.0);
    out.require(got.u_max == ref.u_max && got.B == ref.B,
                "constants for " + std::to_string(ex.layers.size()) + " layers");
  }
  out.detail << "examples B = " << num(bound_constants(2, examples[0].layers, 1.0).B, 6) << ", "
             << num(bound_constants(2, examples[1].layers, 1.0).B, 6) << ", "
             << num(bound_constants(2, examples[2].layers, 1.0).B, 10);

  double min_margin = std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    FlowConfig cfg = fixture::small_flow_config(2 + seed % 3, 4);
    cfg.hidden = {32, 32};
    auto f = fixture::make_flow(cfg, 600 + seed, true);
    Random rng(700 + seed);
    const Matrix contexts = fixture::normal_matrix(4, 4, rng);
    const BoundReport r = check_lower_bound(*f.flow, f.params, contexts, 100000, 1.0, rng);
    min_margin = std::min(min_margin, r.margin);
  }
  out.detail << "; min margin over 20 seeds x 1e5 actions " << num(min_margin);
  out.require(min_margin >= 0.0, "margin");
}

// 4. KL cap ----------------------------------------------------------------

void kl_cap(Outcome& out) {
  double worst_slack = std::numeric_limits<double>::infinity();
  std::size_t checks = 0;
  auto record = [&](const KlEstimate& kl, const std::string& label) {
    const double slack = kl.bound + 3.0 * kl.std_err - kl.estimate;
    worst_slack = std::min(worst_slack, slack);
    ++checks;
    out.require(slack >= 0.0, label);
  };

  // Identity flow against the unit disk, where the exact value is known.
  auto ident = fixture::make_flow(fixture::small_flow_config(2, 1), 1, false);
  Random rng(800);
  const std::vector<double> zero{0.0};
  const auto disk = kl_cap_check(UniformBallBehavior(2, 1.0), *ident.flow, ident.params, zero,
                                 50000, rng, 1.0);
  record(disk, "unit disk");
  const double exact = oracle::disk_vs_normal_kl(1.0);
  out.require(std::abs(disk.estimate - exact) <= 3.0 * disk.std_err, "unit disk value");
  out.detail << "unit disk KL " << num(disk.estimate) << " (quadrature " << num(exact) << ")";

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto f = fixture::make_flow(fixture::small_flow_config(2, 2), 900 + seed, true);
    Random r(1000 + seed);
    const std::vector<double> action{r.uniform(-0.9, 0.9), r.uniform(-0.9, 0.9)};
    const std::vector<double> ctx{r.normal(), r.normal()};
    record(kl_cap_check(dataset_kernel(action, 0.1 + 0.1 * static_cast<double>(seed % 3), 1.0),
                        *f.flow, f.params, ctx, 20000, r, 1.0),
           "random flow " + std::to_string(seed));
  }

  // Low-level flow after a short training run, against kernels fit to
  // dataset actions.
  TrainConfig cfg;
  cfg.steps = 300;
  cfg.eval_interval = 300;
  cfg.eval_goals = 2;
  ChainEnv env(5);
  const OfflineDataset ds = generate_dataset(env, 50, 11);
  Trainer trainer(cfg, ds, env);
  trainer.run();
  const auto& low = dynamic_cast<const ConditionalFlow&>(trainer.low().density());
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& tr = ds.trajectories[i];
    const std::size_t t = tr.transitions() / 2;
    const auto s = tr.state(t);
    const auto sk = tr.state(std::min(t + cfg.k, tr.transitions()));
    std::vector<double> ctx(s);
    ctx.insert(ctx.end(), sk.begin(), sk.end());
    const std::vector<double> a{tr.actions(static_cast<Eigen::Index>(t), 0),
                                tr.actions(static_cast<Eigen::Index>(t), 1)};
    record(kl_cap_check(dataset_kernel(a, 0.2, 1.0), low, trainer.low().params(), ctx, 20000, rng,
                        1.0),
           "trained low policy " + std::to_string(i));
  }

  double worst_self = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto f = fixture::make_flow(fixture::small_flow_config(3, 2), 1100 + seed, true);
    Random r(1200 + seed);
    const std::vector<double> ctx{r.normal(), r.normal()};
    const auto kl = kl_self_check(*f.flow, f.params, ctx, 20000, r);
    // Both terms are the same log density; only rounding noise remains.
    const double z = std::abs(kl.estimate) / (3.0 * kl.std_err + 1e-12);
    worst_self = std::max(worst_self, z);
  }
  out.require(worst_self <= 1.0, "self KL");
  out.detail << "; " << checks << " cap checks, min slack " << num(worst_slack)
             << "; self KL worst |est|/(3 se) " << num(worst_self);
}

// 5. Value oracle ----------------------------------------------------------

void value_oracle(Outcome& out) {
  ChainEnv env(5);
  const OfflineDataset ds = fixture::sweep_dataset(env, 500, 3);
  BatchSampler sampler(ds, env);
  Random init(1);
  ValueFunction vf(2, {64, 64}, init);
  AdamState adam = AdamState::for_params(vf.online(), 3e-4);
  const ValueUpdateOptions opt{0.5, 0.99, 0.005, 10.0};
  for (std::uint64_t step = 0; step < 20000; ++step) {
    Random rng(9, step);
    value_update(vf, adam, sampler.value_batch(rng, 256), opt);
  }
  const auto dp = oracle::chain_values(5, 0.99);
  double worst = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t g = 0; g < 5; ++g) {
      const std::vector<double> s{env.cell_x(i), 0.0}, goal{env.cell_x(g), 0.0};
      worst = std::max(worst, std::abs(vf.value(s, goal) - dp[i][g]));
    }
  }
  out.detail << "max |V - V_dp| over 25 (state, goal) pairs " << num(worst);
  out.require(worst <= 0.05, "value error");
}

// Trained agents -----------------------------------------------------------

TrainConfig load_env_config(const std::string& name) {
  return load_config(fs::path(FLOWHIQL_CONFIG_DIR) / (name + ".ini"));
}

struct TrainedRun {
  double success = 0.0;
  std::unique_ptr<Trainer> trainer;
};

TrainedRun train_run(TrainConfig cfg, const OfflineDataset& full, const GoalEnv& env,
                     const OfflineDataset*& keep) {
  static std::vector<std::unique_ptr<OfflineDataset>> datasets;
  datasets.push_back(std::make_unique<OfflineDataset>(apply_fraction(full, cfg.dataset_fraction)));
  keep = datasets.back().get();
  TrainedRun run;
  run.trainer = std::make_unique<Trainer>(cfg, *keep, env);
  const auto rows = run.trainer->run();
  run.success = rows.empty() ? 0.0 : rows.back().success_rate;
  return run;
}

// 6. Goal reaching ---------------------------------------------------------

void goal_reaching(Outcome& out) {
  for (const auto& [name, n_traj, threshold] :
       {std::tuple<std::string, std::size_t, double>{"chain", kChainTrajectories, 0.95},
        {"point_maze", kMazeTrajectories, 0.90}}) {
    const TrainConfig base = load_env_config(name);
    const auto env = make_env(base.env);
    double total = 0.0;
    std::ostringstream per_seed;
    bool signs_ok = true;
    for (std::size_t seed = 0; seed < kSeeds; ++seed) {
      TrainConfig cfg = base;
      cfg.seed = seed;
      const OfflineDataset full = generate_dataset(*env, n_traj, 2000 + seed);
      const OfflineDataset* ds = nullptr;
      TrainedRun run = train_run(cfg, full, *env, ds);
      // Final success over a fresh evaluation stream.
      Random eval_rng(3000 + seed, 0);
      HierarchicalAgent agent(run.trainer->high(), run.trainer->low(), cfg.k, cfg.eval_high_noise,
                              cfg.eval_low_noise);
      const double rate =
          evaluate(agent, *env, env->eval_goals(cfg.eval_goals), cfg.eval_episodes, eval_rng)
              .success_rate;
      total += rate;
      per_seed << (seed ? " " : "") << num(rate, 3);

      if (name == "chain") {
        // Noise-free agent: the first action from every cell points at the goal.
        const auto& chain = dynamic_cast<const ChainEnv&>(*env);
        for (std::size_t i = 0; i < chain.cells(); ++i) {
          for (std::size_t j = 0; j < chain.cells(); ++j) {
            if (i == j) continue;
            const std::vector<double> s{chain.cell_x(i), 0.0}, g{chain.cell_x(j), 0.0};
            std::vector<double> subgoal;
            Random r(seed);
            const auto a = act(run.trainer->high(), run.trainer->low(), s, g, r, 0, cfg.k, subgoal,
                               0.0, 0.0);
            signs_ok = signs_ok && (a[0] > 0.0) == (j > i);
          }
        }
      }
    }
    const double mean = total / static_cast<double>(kSeeds);
    out.detail << name << " " << num(mean, 3) << " (" << per_seed.str() << ") ";
    out.require(mean >= threshold, name + " success");
    if (name == "chain") {
      out.detail << "action signs " << (signs_ok ? "ok" : "wrong") << "; ";
      out.require(signs_ok, "chain action sign");
    }
  }
}

// 7. Multimodality and data efficiency -------------------------------------

struct ModeMass {
  double upper = 0.0;
  double lower = 0.0;
};

// Monte Carlo estimate of the subgoal mass the high policy puts in each
// corridor, at the start state with the maze goal.
ModeMass corridor_mass(const PolicyHead& high, const TwoCorridorMaze& env, std::size_t n,
                       std::uint64_t seed) {
  std::vector<double> ctx = env.start_state();
  const auto goal = env.eval_goals(1).front();
  ctx.insert(ctx.end(), goal.begin(), goal.end());
  const Matrix c = fixture::row(ctx).replicate(static_cast<Eigen::Index>(n), 1);
  Random rng(seed, 1);
  const Matrix sg = high.density().sample_batch(high.params(), c, rng, 1.0);
  ModeMass m;
  for (Eigen::Index i = 0; i < sg.rows(); ++i) {
    const int row = env.cell_at(sg(i, 0), sg(i, 1)).row;
    m.upper += row == env.upper_row();
    m.lower += row == env.lower_row();
  }
  m.upper /= static_cast<double>(n);
  m.lower /= static_cast<double>(n);
  return m;
}

void multimodality(Outcome& out) {
  const TrainConfig base = load_env_config("two_corridor");
  TwoCorridorMaze env;
  std::map<std::pair<std::string, double>, double> success;
  std::map<std::string, ModeMass> mass;
  for (std::size_t seed = 0; seed < kSeeds; ++seed) {
    const OfflineDataset full = generate_dataset(env, kCorridorTrajectories, 4000 + seed);
    for (const char* family : {"flow", "gaussian"}) {
      for (double fraction : {1.0, 0.5}) {
        TrainConfig cfg = base;
        cfg.seed = seed;
        cfg.family = family;
        cfg.dataset_fraction = fraction;
        const OfflineDataset* ds = nullptr;
        TrainedRun run = train_run(cfg, full, env, ds);
        success[{family, fraction}] += run.success / static_cast<double>(kSeeds);
        if (fraction == 1.0) {
          const ModeMass m = corridor_mass(run.trainer->high(), env, 20000, 5000 + seed);
          mass[family].upper += m.upper / static_cast<double>(kSeeds);
          mass[family].lower += m.lower / static_cast<double>(kSeeds);
        }
      }
    }
  }
  const ModeMass& fm = mass["flow"];
  const ModeMass& gm = mass["gaussian"];
  out.detail << "mode mass upper/lower: flow " << num(fm.upper, 3) << "/" << num(fm.lower, 3)
             << ", gaussian " << num(gm.upper, 3) << "/" << num(gm.lower, 3) << "; ";
  out.require(fm.upper >= 0.30 && fm.lower >= 0.30, "flow holds both modes");
  out.require(gm.upper < 0.30 || gm.lower < 0.30, "gaussian misses a mode");

  const double f1 = success[{"flow", 1.0}], f5 = success[{"flow", 0.5}];
  const double g1 = success[{"gaussian", 1.0}], g5 = success[{"gaussian", 0.5}];
  out.detail << "success 1.0/0.5: flow " << num(f1, 3) << "/" << num(f5, 3) << ", gaussian "
             << num(g1, 3) << "/" << num(g5, 3);
  out.require(f5 >= g5, "flow >= gaussian at half data");
  out.require(f1 - f5 <= g1 - g5, "flow drop <= gaussian drop");
}

// 8. Reproducibility -------------------------------------------------------

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FLOWHIQL_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Every output file except manifest.json byte for byte; manifests without
// their wall-clock field.
bool same_outputs(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), a));
  }
  std::size_t count_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) count_b += e.is_regular_file();
  if (files.size() != count_b || files.empty()) {
    why = a.filename().string() + ": file lists differ";
    return false;
  }
  for (const auto& rel : files) {
    if (rel.filename() == "manifest.json") {
      auto ja = nlohmann::json::parse(slurp(a / rel));
      auto jb = nlohmann::json::parse(slurp(b / rel));
      ja.erase("wall_clock_seconds");
      jb.erase("wall_clock_seconds");
      if (ja != jb) {
        why = (a / rel).string() + " differs";
        return false;
      }
    } else if (slurp(a / rel) != slurp(b / rel)) {
      why = (a / rel).string() + " differs";
      return false;
    }
  }
  return true;
}

void reproducibility(Outcome& out, const fs::path& work) {
  const fs::path root = work / "repro";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream cfg(root / "run.ini");
    cfg << "[run]\nenv = chain\nsteps = 60\neval_interval = 20\n[hiql]\nk = 3\nbatch_size = 64\n"
           "[network]\nvalue_hidden = 16,16\npolicy_hidden = 16,16\n[eval]\neval_goals = 4\n";
    std::ofstream goals(root / "goals.txt");
    goals << "1 0\n-1 0\n2 0\n";
  }
  const std::string cfg = (root / "run.ini").string();
  std::vector<std::pair<std::string, std::function<std::string(const std::string&)>>> commands{
      {"gen-data", [&](const std::string& o) {
         return "gen-data --env chain --n-traj 30 --seed 4 --out " + o;
       }},
      {"train", [&](const std::string& o) {
         return "train --config " + cfg + " --data " + (root / "gen-data_a/dataset.bin").string() +
                " --out " + o;
       }},
      {"eval", [&](const std::string& o) {
         return "eval --checkpoint " + (root / "train_a/final.ckpt").string() + " --goals " +
                (root / "goals.txt").string() + " --episodes 2 --seeds 2 --out " + o;
       }},
      {"verify", [&](const std::string& o) {
         return "verify --checkpoint " + (root / "train_a/final.ckpt").string() + " --data " +
                (root / "gen-data_a/dataset.bin").string() + " --samples 10000 --contexts 3 --out " + o;
       }},
      {"report", [&](const std::string& o) {
         return "report " + (root / "train_a").string() + " --out " + o;
       }},
  };
  std::size_t identical = 0;
  for (const auto& [name, args] : commands) {
    const fs::path a = root / (name + "_a"), b = root / (name + "_b");
    const int ca = run_cli(args(a.string()));
    const int cb = run_cli(args(b.string()));
    std::string why;
    const bool ok = ca == 0 && cb == 0 && same_outputs(a, b, why);
    if (ca != 0 || cb != 0) why = name + " exited with " + std::to_string(ca) + "/" + std::to_string(cb);
    out.require(ok, why);
    identical += ok;
  }
  out.detail << identical << "/" << commands.size() << " commands byte-identical on rerun; ";

  // Resume from the step-20 checkpoint and compare with the uninterrupted run.
  const fs::path resumed = root / "train_resumed";
  const int rc = run_cli("train --config " + cfg + " --data " +
                         (root / "gen-data_a/dataset.bin").string() + " --resume " +
                         (root / "train_a/checkpoints/step_20.ckpt").string() + " --out " +
                         resumed.string());
  const bool metrics_same =
      rc == 0 && slurp(resumed / "metrics.csv") == slurp(root / "train_a/metrics.csv");
  const bool ckpt_same = rc == 0 && slurp(resumed / "final.ckpt") == slurp(root / "train_a/final.ckpt");
  out.detail << "resume from step 20: metrics " << (metrics_same ? "identical" : "DIFFER")
             << ", final checkpoint " << (ckpt_same ? "identical" : "DIFFERS");
  out.require(metrics_same, "resumed metrics");
  out.require(ckpt_same, "resumed checkpoint");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  std::string work = "acceptance_work";
  app.add_option("--criterion", only, "Run a single criterion (1-8)")->check(CLI::Range(1, 8));
  app.add_option("--work", work, "Scratch directory");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"flow exactness", flow_exactness},
      {"gradient agreement", gradients},
      {"density lower bound", lower_bound},
      {"KL cap", kl_cap},
      {"value oracle", value_oracle},
      {"goal reaching", goal_reaching},
      {"multimodality and data efficiency", multimodality},
      {"reproducibility", [&](Outcome& o) { reproducibility(o, work); }},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "[exception: " << e.what() << "]";
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << "  "
              << criteria[i].first << ": " << o.detail.str() << " [" << num(secs, 3) << " s]"
              << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
