#pragma once

#include "flowhiql/envs_data/goal_env.hpp"

namespace flowhiql {

/// Discrete chain embedded in a continuous state (x, y). x takes the cell
/// centres i - (n-1)/2; the first action coordinate moves one cell left or
/// right past a +-1/3 dead zone, the second nudges the lateral coordinate y.
/// Success is tested on x only.
class ChainEnv final : public GoalEnv {
 public:
  explicit ChainEnv(std::size_t cells = 5);

  std::string descriptor() const override;
  std::size_t state_dim() const override { return 2; }
  std::size_t action_dim() const override { return 2; }
  std::size_t position_dim() const override { return 1; }
  std::size_t max_episode_steps() const override { return 3 * cells_; }
  double state_norm_bound() const override;

  std::vector<double> transition(std::span<const double> state,
                                 std::span<const double> action) const override;
  std::vector<double> start_state() const override;
  std::vector<std::vector<double>> eval_goals(std::size_t count) const override;
  Trajectory behavior_trajectory(Random& rng) const override;
  std::unique_ptr<GoalPolicy> oracle_policy() const override;

  std::size_t cells() const { return cells_; }
  double cell_x(std::size_t i) const;
  /// Nearest cell index of an x coordinate.
  std::size_t cell_of(double x) const;

 private:
  std::size_t cells_;
};

}  // namespace flowhiql
