#include "flowhiql/envs_data/evaluate.hpp"

#include <cmath>

#include "flowhiql/errors.hpp"

namespace flowhiql {

EvalResult evaluate(GoalPolicy& policy, const GoalEnv& env,
                    const std::vector<std::vector<double>>& goals,
                    std::size_t episodes_per_goal, Random& rng,
                    const std::vector<double>* start) {
  if (goals.empty()) throw ArgumentError("evaluation needs at least one goal");
  if (episodes_per_goal == 0) throw ArgumentError("episodes per goal must be at least 1");
  const std::size_t sd = env.state_dim();
  const std::vector<double> s0 = start ? *start : env.start_state();
  if (s0.size() != sd) throw ConfigError("start state has the wrong dimension");

  const std::size_t n = goals.size() * episodes_per_goal;
  const auto rows = static_cast<Eigen::Index>(n);
  Matrix states(rows, static_cast<Eigen::Index>(sd));
  Matrix goal_rows(rows, static_cast<Eigen::Index>(sd));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& g = goals[i / episodes_per_goal];
    if (g.size() != sd) throw ConfigError("goal has the wrong dimension");
    for (std::size_t j = 0; j < sd; ++j) {
      states(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s0[j];
      goal_rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g[j];
    }
  }

  EvalResult result;
  result.episodes = n;
  result.first_success.assign(n, -1);
  policy.reset(states, goal_rows);
  const std::size_t horizon = env.max_episode_steps();
  std::size_t remaining = n;
  for (std::size_t step = 0;; ++step) {
    for (std::size_t i = 0; i < n; ++i) {
      if (result.first_success[i] >= 0) continue;
      const auto s = states.row(static_cast<Eigen::Index>(i));
      const auto g = goal_rows.row(static_cast<Eigen::Index>(i));
      if (env.success(std::span<const double>(s.data(), sd), std::span<const double>(g.data(), sd))) {
        result.first_success[i] = static_cast<long>(step);
        --remaining;
      }
    }
    if (step == horizon || remaining == 0) break;
    const Matrix actions = policy.act(states, step, rng);
    if (actions.rows() != rows || static_cast<std::size_t>(actions.cols()) != env.action_dim()) {
      throw ConfigError("policy returned actions of the wrong shape");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (result.first_success[i] >= 0) continue;
      const auto s = states.row(static_cast<Eigen::Index>(i));
      const auto a = actions.row(static_cast<Eigen::Index>(i));
      const auto next = env.transition(std::span<const double>(s.data(), sd),
                                       std::span<const double>(a.data(), a.size()));
      for (std::size_t j = 0; j < sd; ++j) {
        states(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = next[j];
      }
    }
  }

  result.per_goal.assign(goals.size(), 0.0);
  double hits = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (result.first_success[i] >= 0) {
      hits += 1.0;
      result.per_goal[i / episodes_per_goal] += 1.0 / static_cast<double>(episodes_per_goal);
    }
  }
  result.success_rate = hits / static_cast<double>(n);
  return result;
}

SeedSummary summarize_seeds(const std::vector<EvalResult>& runs) {
  if (runs.empty()) throw ArgumentError("no evaluation runs to summarize");
  SeedSummary out;
  const double m = static_cast<double>(runs.size());
  out.per_goal.assign(runs.front().per_goal.size(), 0.0);
  for (const auto& r : runs) {
    if (r.per_goal.size() != out.per_goal.size()) throw ConfigError("runs use different goal sets");
    out.per_seed.push_back(r.success_rate);
    out.mean += r.success_rate / m;
    for (std::size_t j = 0; j < r.per_goal.size(); ++j) out.per_goal[j] += r.per_goal[j] / m;
  }
  if (runs.size() > 1) {
    double ss = 0.0;
    for (double x : out.per_seed) ss += (x - out.mean) * (x - out.mean);
    out.std_err = std::sqrt(ss / (m - 1.0)) / std::sqrt(m);
  }
  return out;
}

Matrix RandomPolicy::act(const Matrix& states, std::size_t, Random& rng) {
  Matrix a(states.rows(), static_cast<Eigen::Index>(action_dim_));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rng.uniform(-1.0, 1.0);
  }
  return a;
}

}  // namespace flowhiql
