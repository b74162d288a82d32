#include "flowhiql/envs_data/samplers.hpp"

#include <algorithm>
#include <cmath>

#include "flowhiql/errors.hpp"

namespace flowhiql {

namespace {

void copy_row(Matrix& dst, std::size_t i, const Matrix& src, std::size_t j) {
  dst.row(static_cast<Eigen::Index>(i)) = src.row(static_cast<Eigen::Index>(j));
}

}  // namespace

BatchSampler::BatchSampler(const OfflineDataset& ds, const GoalEnv& env, RelabelOptions options)
    : ds_(ds), env_(env), options_(options) {
  check_dataset_env(ds, env);
  const double total = options.p_geometric + options.p_uniform + options.p_final;
  if (options.p_geometric < 0 || options.p_uniform < 0 || options.p_final < 0 ||
      std::abs(total - 1.0) > 1e-9) {
    throw ArgumentError("goal mixture probabilities must be non-negative and sum to 1");
  }
  if (!(options.gamma > 0.0 && options.gamma < 1.0)) throw ArgumentError("gamma must lie in (0, 1)");
  std::size_t running = 0;
  for (const auto& traj : ds.trajectories) {
    cumulative_.push_back(running);
    running += traj.transitions();
  }
  if (running == 0) throw ArgumentError("dataset has no transitions");
}

std::vector<BatchSampler::Anchor> BatchSampler::anchors(Random& rng, std::size_t n) const {
  if (n == 0) throw ArgumentError("batch size must be at least 1");
  const std::size_t total = ds_.transition_count();
  std::vector<Anchor> out(n);
  for (auto& a : out) {
    const std::size_t flat = rng.index(total);
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), flat);
    a.trajectory = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    a.t = flat - cumulative_[a.trajectory];
  }
  return out;
}

std::pair<std::size_t, GoalMode> BatchSampler::relabel(Random& rng, std::size_t t,
                                                        std::size_t uniform_lo,
                                                        std::size_t T) const {
  const double u = rng.uniform();
  if (u < options_.p_geometric) {
    return {std::min(t + rng.geometric(1.0 - options_.gamma), T), GoalMode::kGeometric};
  }
  if (u < options_.p_geometric + options_.p_uniform) {
    return {uniform_lo + rng.index(T - uniform_lo + 1), GoalMode::kUniform};
  }
  return {T, GoalMode::kFinal};
}

ValueBatch BatchSampler::value_batch(Random& rng, std::size_t n) const {
  const auto picks = anchors(rng, n);
  const auto sd = static_cast<Eigen::Index>(ds_.state_dim);
  ValueBatch b;
  b.s.resize(static_cast<Eigen::Index>(n), sd);
  b.s_next.resize(static_cast<Eigen::Index>(n), sd);
  b.g.resize(static_cast<Eigen::Index>(n), sd);
  b.reward.resize(n);
  b.terminal.resize(n);
  b.index.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& traj = ds_.trajectories[picks[i].trajectory];
    const std::size_t t = picks[i].t;
    const std::size_t T = traj.transitions();
    const auto [goal, mode] = relabel(rng, t, t, T);
    copy_row(b.s, i, traj.states, t);
    copy_row(b.s_next, i, traj.states, t + 1);
    copy_row(b.g, i, traj.states, goal);
    const auto s = b.s.row(static_cast<Eigen::Index>(i));
    const auto g = b.g.row(static_cast<Eigen::Index>(i));
    const bool done = env_.success(std::span<const double>(s.data(), s.size()),
                                   std::span<const double>(g.data(), g.size()));
    b.terminal[i] = done ? 1 : 0;
    b.reward[i] = done ? 0.0 : -1.0;
    b.index[i] = {picks[i].trajectory, t, goal, t + 1, mode};
  }
  return b;
}

HighBatch BatchSampler::high_batch(Random& rng, std::size_t n, std::size_t k) const {
  if (k == 0) throw ArgumentError("k must be at least 1");
  const auto picks = anchors(rng, n);
  const auto sd = static_cast<Eigen::Index>(ds_.state_dim);
  HighBatch b;
  b.s.resize(static_cast<Eigen::Index>(n), sd);
  b.s_k.resize(static_cast<Eigen::Index>(n), sd);
  b.g.resize(static_cast<Eigen::Index>(n), sd);
  b.index.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& traj = ds_.trajectories[picks[i].trajectory];
    const std::size_t t = picks[i].t;
    const std::size_t T = traj.transitions();
    const std::size_t sub = std::min(t + k, T);
    const auto [goal, mode] = relabel(rng, t, sub, T);
    copy_row(b.s, i, traj.states, t);
    copy_row(b.s_k, i, traj.states, sub);
    copy_row(b.g, i, traj.states, goal);
    b.index[i] = {picks[i].trajectory, t, goal, sub, mode};
  }
  return b;
}

LowBatch BatchSampler::low_batch(Random& rng, std::size_t n, std::size_t k) const {
  if (k == 0) throw ArgumentError("k must be at least 1");
  const auto picks = anchors(rng, n);
  const auto sd = static_cast<Eigen::Index>(ds_.state_dim);
  LowBatch b;
  b.s.resize(static_cast<Eigen::Index>(n), sd);
  b.a.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ds_.action_dim));
  b.s_next.resize(static_cast<Eigen::Index>(n), sd);
  b.s_k.resize(static_cast<Eigen::Index>(n), sd);
  b.index.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& traj = ds_.trajectories[picks[i].trajectory];
    const std::size_t t = picks[i].t;
    const std::size_t sub = std::min(t + k, traj.transitions());
    copy_row(b.s, i, traj.states, t);
    copy_row(b.a, i, traj.actions, t);
    copy_row(b.s_next, i, traj.states, t + 1);
    copy_row(b.s_k, i, traj.states, sub);
    b.index[i] = {picks[i].trajectory, t, sub, sub, GoalMode::kFinal};
  }
  return b;
}

}  // namespace flowhiql
