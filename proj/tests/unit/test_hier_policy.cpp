#include <doctest.h>

#include <cmath>
#include <string>

#include "fixtures.hpp"
#include "flowhiql/envs_data/chain_env.hpp"
#include "flowhiql/envs_data/samplers.hpp"
#include "flowhiql/errors.hpp"
#include "flowhiql/hier_policy/agent.hpp"
#include "flowhiql/hier_policy/policy_updates.hpp"
#include "flowhiql/hier_policy/trainer.hpp"
#include "flowhiql/tensor_nn/checkpoint.hpp"
#include "oracles.hpp"

using namespace flowhiql;
using fixture::normal_matrix;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.value_hidden = {16, 16};
  c.policy_hidden = {16, 16};
  c.batch_size = 32;
  c.steps = 20;
  c.eval_interval = 10;
  c.eval_goals = 4;
  return c;
}

// V with a zero output layer is constant, so every advantage is 0.
void flatten_value(ValueFunction& vf) {
  const std::size_t last = vf.net().layer_count() - 1;
  for (auto& w : vf.online().values(vf.net().weight_segment(last))) w = 0.0;
}

HighBatch random_high_batch(std::size_t n, std::size_t dim, Random& rng) {
  HighBatch b;
  const auto r = static_cast<Eigen::Index>(n);
  const auto d = static_cast<Eigen::Index>(dim);
  b.s = normal_matrix(r, d, rng);
  b.s_k = normal_matrix(r, d, rng);
  b.g = normal_matrix(r, d, rng);
  b.index.resize(n);
  return b;
}

LowBatch random_low_batch(std::size_t n, Random& rng) {
  LowBatch b;
  const auto r = static_cast<Eigen::Index>(n);
  b.s = normal_matrix(r, 2, rng);
  b.a = normal_matrix(r, 2, rng, 0.5);
  b.s_next = normal_matrix(r, 2, rng);
  b.s_k = normal_matrix(r, 2, rng);
  b.index.resize(n);
  return b;
}

// Mass of a 2-D head's density inside the disk of radius 0.75 around (cx, 0),
// by midpoint quadrature at a zero context.
double disk_mass(const PolicyHead& head, double cx) {
  const int m = 300;
  const double lo = -6.0, h = 12.0 / m;
  Matrix grid(m * m, 2);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      grid(i * m + j, 0) = lo + (i + 0.5) * h;
      grid(i * m + j, 1) = lo + (j + 0.5) * h;
    }
  }
  const Matrix lp = head.density().log_prob(head.params(), grid,
                                            Matrix::Zero(m * m, head.density().context_dim()));
  double mass = 0.0;
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    if (std::hypot(grid(r, 0) - cx, grid(r, 1)) <= 0.75) mass += std::exp(lp(r, 0));
  }
  return mass * h * h;
}

}  // namespace

TEST_CASE("advantages are value differences") {
  Random rng(1);
  ValueFunction vf(2, {8}, rng);
  const std::vector<double> s{0.1, 0.2}, sk{0.5, -0.4}, g{1.0, 1.0}, s1{0.2, 0.2};
  CHECK(high_advantage(vf, s, sk, g) == vf.value(sk, g) - vf.value(s, g));
  CHECK(high_advantage(vf, s, s, g) == 0.0);
  CHECK(low_advantage(vf, s, s1, sk) == vf.value(s1, sk) - vf.value(s, sk));
  CHECK(low_advantage(vf, s, s, sk) == 0.0);
  // V(s_k, g) = -3, V(s, g) = -5 through a constant-output network.
  flatten_value(vf);
  auto bias = vf.online().values(vf.net().bias_segment(vf.net().layer_count() - 1));
  bias[0] = -3.0;
  const double v_k = vf.value(sk, g);
  bias[0] = -5.0;
  const double v_s = vf.value(s, g);
  CHECK(v_k - v_s == 2.0);
  Random brng(2);
  const auto hb = random_high_batch(20, 2, brng);
  const auto adv = high_advantages(vf, hb);
  for (Eigen::Index i = 0; i < 20; ++i) CHECK(adv(i) == 0.0);
}

TEST_CASE("advantages from a learned chain value match dynamic programming") {
  ChainEnv env(5);
  const auto ds = fixture::sweep_dataset(env, 500, 3);
  BatchSampler sampler(ds, env);
  Random init(1);
  ValueFunction vf(2, {64, 64}, init);
  AdamState adam = AdamState::for_params(vf.online(), 3e-4);
  ValueUpdateOptions opt;
  opt.tau = 0.5;
  for (std::size_t step = 1; step <= 10000; ++step) {
    Random r(9, step);
    value_update(vf, adam, sampler.value_batch(r, 256), opt);
  }
  const double gamma = 0.99;
  const auto dp = oracle::chain_values(5, gamma);
  const auto at = [&](std::size_t cell) { return std::vector<double>{env.cell_x(cell), 0.0}; };
  // Subgoal two cells closer: gamma^(d-2) (1 - gamma^2) / (1 - gamma).
  for (std::size_t d : {2u, 3u, 4u}) {
    const double expected = std::pow(gamma, d - 2.0) * (1 - gamma * gamma) / (1 - gamma);
    CHECK(dp[2][d] - dp[0][d] == doctest::Approx(expected).epsilon(1e-9));
    CHECK(std::abs(high_advantage(vf, at(0), at(2), at(d)) - expected) < 0.1);
  }
  for (std::size_t sub = 0; sub < 5; ++sub) {
    for (std::size_t s = 0; s < 5; ++s) {
      if (s == sub) continue;
      const std::size_t toward = s < sub ? s + 1 : s - 1;
      CHECK(low_advantage(vf, at(s), at(toward), at(sub)) > 0.0);
      if (s != 0 && s != 4) {
        const std::size_t away = s < sub ? s - 1 : s + 1;
        CHECK(low_advantage(vf, at(s), at(away), at(sub)) < 0.0);
      }
    }
  }
}

TEST_CASE("awr weights") {
  CHECK(awr_weight(0.0, 3.0, 100.0) == 1.0);
  CHECK(awr_weight(1.0, 3.0, 100.0) == doctest::Approx(20.0855).epsilon(1e-5));
  CHECK(awr_weight(10.0, 3.0, 100.0) == 100.0);
  CHECK(awr_weight(1e6, 3.0, 100.0) == 100.0);
  CHECK(awr_weight(5.0, 0.0, 100.0) == 1.0);
  CHECK_THROWS_AS(awr_weight(1.0, -1.0, 100.0), ArgumentError);
  Random rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double adv = rng.uniform(-300.0, 300.0);
    const double w = awr_weight(adv, rng.uniform(0.0, 10.0), 100.0);
    CHECK(w > 0.0);
    CHECK(w <= 100.0);
  }
}

TEST_CASE("zero advantage or zero beta reduces the update to maximum likelihood") {
  const TrainConfig cfg = small_config();
  Random rng(4);
  ValueFunction vf(2, {8}, rng);
  const auto hb = random_high_batch(32, 2, rng);
  const auto lb = random_low_batch(32, rng);
  for (const char* family : {"flow", "gaussian"}) {
    Random init(5);
    PolicyHead head(family, "high", 2, 4, cfg, init);
    Random li(5);
    PolicyHead low(family, "low", 2, 4, cfg, li);
    const auto wb = high_weighted_batch(vf, hb, 0.0, 100.0);
    for (double w : wb.weight) CHECK(w == 1.0);
    const auto lwb = low_weighted_batch(vf, lb, 0.0, 100.0);
    for (double w : lwb.weight) CHECK(w == 1.0);
    // The update must equal clip + Adam on the unweighted NLL.
    PolicyHead ref = [&] { Random r(5); return PolicyHead(family, "high", 2, 4, cfg, r); }();
    AdamState a1 = AdamState::for_params(head.params(), 1e-3);
    AdamState a2 = AdamState::for_params(ref.params(), 1e-3);
    PolicyUpdateOptions opt;
    opt.beta = 0.0;
    high_policy_update(head, a1, vf, hb, opt);
    WeightedBatch plain{hb.s_k, concat_rows(hb.s, hb.g), std::vector<double>(32, 1.0)};
    auto vg = weighted_nll_value_and_grad(ref.density(), ref.params(), plain);
    clip_grad_norm(vg.grad, opt.grad_clip);
    adam_step(a2, ref.params(), vg.grad);
    for (std::size_t i = 0; i < head.params().size(); ++i) {
      CHECK(head.params().flat()[i] == ref.params().flat()[i]);
    }
  }
  flatten_value(vf);
  const auto wb = high_weighted_batch(vf, hb, 3.0, 100.0);
  for (double w : wb.weight) CHECK(w == 1.0);
}

TEST_CASE("equal weights scale the behavior cloning gradient") {
  const TrainConfig cfg = small_config();
  Random rng(6);
  PolicyHead low("flow", "low", 2, 4, cfg, rng);
  fixture::randomize_flow(dynamic_cast<const ConditionalFlow&>(low.density()), low.params(), rng);
  const auto lb = random_low_batch(40, rng);
  WeightedBatch bc{lb.a, concat_rows(lb.s, lb.s_k), std::vector<double>(40, 1.0)};
  WeightedBatch scaled = bc;
  scaled.weight.assign(40, 2.5);
  const auto g1 = weighted_nll_value_and_grad(low.density(), low.params(), bc);
  const auto g2 = weighted_nll_value_and_grad(low.density(), low.params(), scaled);
  for (std::size_t i = 0; i < g1.grad.size(); ++i) {
    CHECK(g2.grad[i] == doctest::Approx(2.5 * g1.grad[i]).epsilon(1e-12));
  }
}

TEST_CASE("low-level weighted loss gradient matches finite differences") {
  const TrainConfig cfg = small_config();
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Random rng(seed);
    ValueFunction vf(2, {8}, rng);
    PolicyHead low("flow", "low", 2, 4, cfg, rng);
    fixture::randomize_flow(dynamic_cast<const ConditionalFlow&>(low.density()), low.params(), rng);
    const auto wb = low_weighted_batch(vf, random_low_batch(32, rng), 3.0, 100.0);
    const auto vg = weighted_nll_value_and_grad(low.density(), low.params(), wb);
    const auto fd = oracle::fd_gradient(
        [&](const ParamStore& p) { return weighted_nll_loss(low.density(), p, wb); }, low.params());
    CHECK(oracle::percentile(oracle::relative_errors(vg.grad, fd), 0.95) < 1e-4);
  }
}

TEST_CASE("value parameters change the weights but receive no policy gradient") {
  const TrainConfig cfg = small_config();
  Random rng(7);
  ValueFunction vf(2, {8}, rng);
  PolicyHead high("flow", "high", 2, 4, cfg, rng);
  fixture::randomize_flow(dynamic_cast<const ConditionalFlow&>(high.density()), high.params(), rng);
  const auto hb = random_high_batch(32, 2, rng);
  const auto w0 = high_weighted_batch(vf, hb, 3.0, 100.0);
  ValueFunction moved = vf;
  for (auto& v : moved.online().flat()) v += 0.05;
  const auto w1 = high_weighted_batch(moved, hb, 3.0, 100.0);
  CHECK(w0.weight != w1.weight);
  // The policy gradient at the perturbed V is the gradient of the NLL with
  // the perturbed weights frozen: no term flows back through V.
  const auto vg = weighted_nll_value_and_grad(high.density(), high.params(), w1);
  const auto fd = oracle::fd_gradient(
      [&](const ParamStore& p) { return weighted_nll_loss(high.density(), p, w1); }, high.params());
  CHECK(oracle::percentile(oracle::relative_errors(vg.grad, fd), 0.95) < 1e-4);
  const ParamStore before = moved.online();
  AdamState adam = AdamState::for_params(high.params(), 1e-3);
  high_policy_update(high, adam, moved, hb, {});
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(moved.online().flat()[i] == before.flat()[i]);
}

TEST_CASE("flow captures two equally weighted subgoal modes where a gaussian cannot") {
  TrainConfig cfg;
  cfg.policy_hidden = {32, 32};
  double flow_min = 0.0, gauss_min = 1.0;
  for (const char* family : {"flow", "gaussian"}) {
    Random init(1);
    PolicyHead head(family, "high", 2, 4, cfg, init);
    Random vi(2);
    ValueFunction vf(2, {8}, vi);
    flatten_value(vf);
    AdamState adam = AdamState::for_params(head.params(), 1e-3);
    for (std::uint64_t step = 0; step < 1000; ++step) {
      Random r(3, step);
      HighBatch b;
      b.s = Matrix::Zero(256, 2);
      b.g = Matrix::Zero(256, 2);
      b.s_k.resize(256, 2);
      for (Eigen::Index i = 0; i < 256; ++i) {
        b.s_k(i, 0) = (r.uniform() < 0.5 ? -3.0 : 3.0) + 0.3 * r.normal();
        b.s_k(i, 1) = 0.3 * r.normal();
      }
      b.index.resize(256);
      high_policy_update(head, adam, vf, b, {});
    }
    const double m = std::min(disk_mass(head, -3.0), disk_mass(head, 3.0));
    (std::string(family) == "flow" ? flow_min : gauss_min) = m;
  }
  CHECK(flow_min >= 0.30);
  CHECK(gauss_min < 0.15);
}

TEST_CASE("policy family selection") {
  const TrainConfig cfg = small_config();
  Random rng(8);
  CHECK(PolicyHead("flow", "h", 2, 4, cfg, rng).density().family() == "flow");
  CHECK(PolicyHead("gaussian", "h", 2, 4, cfg, rng).density().family() == "gaussian");
  CHECK_THROWS_AS(PolicyHead("mixture", "h", 2, 4, cfg, rng), ConfigError);
  CHECK_THROWS_AS(PolicyHead("flow", "h", 1, 4, cfg, rng), ConfigError);
}

TEST_CASE("agent subgoal refresh schedule and zero-noise determinism") {
  const TrainConfig cfg = small_config();
  Random rng(9);
  PolicyHead high("flow", "high", 2, 4, cfg, rng);
  PolicyHead low("flow", "low", 2, 4, cfg, rng);
  const Matrix s = normal_matrix(3, 2, rng);
  const Matrix g = normal_matrix(3, 2, rng);

  HierarchicalAgent every(high, low, 1);
  every.reset(s, g);
  Matrix prev;
  for (std::size_t t = 0; t < 4; ++t) {
    every.act(s, t, rng);
    if (t > 0) CHECK((every.subgoals() - prev).cwiseAbs().maxCoeff() > 0.0);
    prev = every.subgoals();
  }

  HierarchicalAgent slow(high, low, 3);
  slow.reset(s, g);
  for (std::size_t t = 0; t < 7; ++t) {
    slow.act(s, t, rng);
    const bool refreshed = t % 3 == 0;
    if (t > 0) CHECK(((slow.subgoals() - prev).cwiseAbs().maxCoeff() > 0.0) == refreshed);
    prev = slow.subgoals();
  }

  HierarchicalAgent det(high, low, 2, 0.0, 0.0);
  det.reset(s, g);
  Random r1(1), r2(2);
  const Matrix a1 = det.act(s, 0, r1);
  det.reset(s, g);
  CHECK(det.act(s, 0, r2) == a1);
  CHECK(a1.cwiseAbs().maxCoeff() <= 1.0);

  std::vector<double> cache;
  const std::vector<double> sv{s(0, 0), s(0, 1)}, gv{g(0, 0), g(0, 1)};
  Random r3(3);
  act(high, low, sv, gv, r3, 0, 5, cache);
  const auto kept = cache;
  act(high, low, sv, gv, r3, 1, 5, cache);
  CHECK(cache == kept);
  act(high, low, sv, gv, r3, 5, 5, cache);
  CHECK(cache != kept);
  CHECK_THROWS_AS(HierarchicalAgent(high, low, 0), ArgumentError);
}

TEST_CASE("train config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  const auto bad = [](auto mutate) {
    TrainConfig t;
    mutate(t);
    CHECK_THROWS_AS(t.validate(), ArgumentError);
  };
  bad([](TrainConfig& t) { t.k = 0; });
  bad([](TrainConfig& t) { t.beta = -1.0; });
  bad([](TrainConfig& t) { t.w_max = 1.0; });
  bad([](TrainConfig& t) { t.tau = 1.0; });
  bad([](TrainConfig& t) { t.dataset_fraction = 0.0; });
  bad([](TrainConfig& t) { t.family = "mixture"; });
  bad([](TrainConfig& t) { t.p_final = 0.5; });
  bad([](TrainConfig& t) { t.eval_interval = 0; });
  CHECK(c.effective_checkpoint_interval() == c.eval_interval);
  c.checkpoint_interval = 7;
  CHECK(c.effective_checkpoint_interval() == 7);
}

TEST_CASE("trainer with zero steps leaves everything unchanged") {
  ChainEnv env;
  const auto ds = generate_dataset(env, 10, 1);
  TrainConfig cfg = small_config();
  cfg.steps = 0;
  Trainer t(cfg, ds, env);
  const ParamStore before = t.snapshot();
  CHECK(t.run().empty());
  CHECK(encode_checkpoint(t.snapshot()) == encode_checkpoint(before));
}

TEST_CASE("trainer is deterministic and emits rows at the interval and the end") {
  ChainEnv env;
  const auto ds = generate_dataset(env, 10, 1);
  TrainConfig cfg = small_config();
  cfg.steps = 25;
  const auto a = train(cfg, ds, env);
  const auto b = train(cfg, ds, env);
  REQUIRE(a.size() == 3);
  CHECK(a[0].step == 10);
  CHECK(a[1].step == 20);
  CHECK(a[2].step == 25);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].loss_v == b[i].loss_v);
    CHECK(a[i].loss_h == b[i].loss_h);
    CHECK(a[i].loss_l == b[i].loss_l);
    CHECK(a[i].success_rate == b[i].success_rate);
  }
  cfg.seed = 1;
  CHECK(train(cfg, ds, env)[0].loss_v != a[0].loss_v);
}

TEST_CASE("snapshot restore continues the same trajectory") {
  ChainEnv env;
  const auto ds = generate_dataset(env, 10, 1);
  TrainConfig cfg = small_config();
  Trainer full(cfg, ds, env);
  for (int i = 0; i < 6; ++i) full.iteration();
  const ParamStore mid = full.snapshot();
  for (int i = 0; i < 4; ++i) full.iteration();

  Trainer resumed(cfg, ds, env);
  resumed.restore(decode_checkpoint(encode_checkpoint(mid)));
  CHECK(resumed.step() == 6);
  for (int i = 0; i < 4; ++i) resumed.iteration();
  CHECK(encode_checkpoint(resumed.snapshot()) == encode_checkpoint(full.snapshot()));

  const auto pair = load_policies(cfg, env, full.snapshot());
  for (std::size_t i = 0; i < pair.high.params().size(); ++i) {
    CHECK(pair.high.params().flat()[i] == full.high().params().flat()[i]);
  }
  ParamStore wrong;
  wrong.add_segment("value.net.w0", {1});
  CHECK_THROWS_AS(resumed.restore(wrong), ConfigError);
}

TEST_CASE("trainer rejects mismatched data and reports numeric failures with context") {
  ChainEnv env;
  const auto ds = generate_dataset(env, 5, 1);
  const auto maze = make_env("point_maze");
  CHECK_THROWS_AS(Trainer(small_config(), ds, *maze), ConfigError);
  Trainer t(small_config(), ds, env);
  t.value_function().online().flat()[0] = std::nan("");
  try {
    t.iteration();
    FAIL("expected a numeric error");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("step 0, value update") != std::string::npos);
    CHECK_FALSE(e.segment().empty());
  }
}
