#pragma once

#include <cstdint>
#include <vector>

#include "flowhiql/envs_data/goal_env.hpp"

namespace flowhiql {

struct EvalResult {
  double success_rate = 0.0;
  std::vector<double> per_goal;  // success rate per goal, in input order
  std::size_t episodes = 0;
  /// Rollout step at which each episode first succeeded; -1 if it never did.
  std::vector<long> first_success;
};

/// Runs episodes_per_goal episodes per goal in lockstep from env.start_state()
/// (or `start` when given). An episode succeeds if any of s_0 .. s_H
/// satisfies the goal, with H = env.max_episode_steps(). Finished episodes
/// are frozen but the policy still sees every row, so its random draws do
/// not depend on which episodes have ended.
EvalResult evaluate(GoalPolicy& policy, const GoalEnv& env,
                    const std::vector<std::vector<double>>& goals,
                    std::size_t episodes_per_goal, Random& rng,
                    const std::vector<double>* start = nullptr);

struct SeedSummary {
  double mean = 0.0;
  double std_err = 0.0;  // sample std across seeds / sqrt(seed count)
  std::vector<double> per_seed;
  std::vector<double> per_goal;  // averaged over seeds
};

/// Summarizes one EvalResult per seed.
SeedSummary summarize_seeds(const std::vector<EvalResult>& runs);

/// Uniform actions in [-1, 1]^action_dim.
class RandomPolicy final : public GoalPolicy {
 public:
  explicit RandomPolicy(std::size_t action_dim) : action_dim_(action_dim) {}
  void reset(const Matrix&, const Matrix&) override {}
  Matrix act(const Matrix& states, std::size_t step, Random& rng) override;

 private:
  std::size_t action_dim_;
};

}  // namespace flowhiql
