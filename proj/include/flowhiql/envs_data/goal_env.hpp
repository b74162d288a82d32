#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "flowhiql/random.hpp"
#include "flowhiql/tensor_nn/tape.hpp"

namespace flowhiql {

/// s_0 .. s_T as rows of `states`, a_0 .. a_{T-1} as rows of `actions`.
struct Trajectory {
  Matrix states;
  Matrix actions;

  std::size_t transitions() const { return static_cast<std::size_t>(actions.rows()); }
  std::vector<double> state(std::size_t t) const;
};

struct StepResult {
  std::vector<double> next_state;
  double reward = 0.0;
  bool terminal = false;
};

/// Batched goal-conditioned controller: one row per concurrent episode.
class GoalPolicy {
 public:
  virtual ~GoalPolicy() = default;
  virtual void reset(const Matrix& start_states, const Matrix& goals) = 0;
  virtual Matrix act(const Matrix& states, std::size_t step, Random& rng) = 0;
};

/// Deterministic goal-reaching environment. Goals live in state space; the
/// leading position_dim() coordinates decide success.
class GoalEnv {
 public:
  virtual ~GoalEnv() = default;

  virtual std::string descriptor() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_dim() const = 0;
  virtual std::size_t position_dim() const = 0;
  virtual std::size_t max_episode_steps() const = 0;
  virtual double goal_radius() const { return 0.5; }
  /// Upper bound on ||s||_2 over every reachable state.
  virtual double state_norm_bound() const = 0;

  /// s' = P(s, a) with the action clipped to [-1, 1]^action_dim.
  virtual std::vector<double> transition(std::span<const double> state,
                                         std::span<const double> action) const = 0;
  virtual std::vector<double> start_state() const = 0;
  virtual std::vector<std::vector<double>> eval_goals(std::size_t count) const = 0;

  /// One trajectory of the scripted noisy behavior policy.
  virtual Trajectory behavior_trajectory(Random& rng) const = 0;
  /// Noise-free scripted controller that reaches any reachable goal.
  virtual std::unique_ptr<GoalPolicy> oracle_policy() const = 0;

  bool success(std::span<const double> state, std::span<const double> goal) const;
  /// 0 when `state` satisfies `goal`, -1 otherwise.
  double reward(std::span<const double> state, std::span<const double> goal) const;
  /// Reward and terminal flag refer to the state the action is taken from,
  /// matching the TD-target convention of the value learner.
  StepResult step(std::span<const double> state, std::span<const double> action,
                  std::span<const double> goal) const;

  bool action_in_bounds(std::span<const double> action) const;
};

/// Normal(mean, sigma) conditioned on [lo, hi], by rejection.
double truncated_normal(Random& rng, double mean, double sigma, double lo, double hi);

/// Builds an environment from its descriptor ("chain", "chain:<n>",
/// "point_maze", "two_corridor").
std::unique_ptr<GoalEnv> make_env(const std::string& descriptor);

inline constexpr double kBehaviorNoise = 0.2;

}  // namespace flowhiql
