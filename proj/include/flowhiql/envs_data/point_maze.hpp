#pragma once

#include <array>
#include <string>
#include <vector>

#include "flowhiql/envs_data/goal_env.hpp"

namespace flowhiql {

struct Cell {
  int col = 0;
  int row = 0;
  bool operator==(const Cell&) const = default;
};

/// Point mass in a grid maze. State (x, y, vx, vy); the action is an
/// acceleration in [-1, 1]^2. Velocities are clipped to [-1, 1] and
/// positions advance by 0.25 * v per step. A move into a wall is resolved
/// axis by axis: the blocked component keeps its old position and its
/// velocity is zeroed, so the point slides along walls.
class PointMazeEnv : public GoalEnv {
 public:
  /// `layout` rows use '#' for walls and '.' for free cells; the border must
  /// be walls.
  PointMazeEnv(std::string name, std::vector<std::string> layout, Cell start,
               std::size_t behavior_steps = 200);

  /// U-shaped 7x5 maze used for the goal-reaching experiments.
  static PointMazeEnv simple();

  std::string descriptor() const override { return name_; }
  std::size_t state_dim() const override { return 4; }
  std::size_t action_dim() const override { return 2; }
  std::size_t position_dim() const override { return 2; }
  std::size_t max_episode_steps() const override { return 400; }
  double state_norm_bound() const override;

  std::vector<double> transition(std::span<const double> state,
                                 std::span<const double> action) const override;
  std::vector<double> start_state() const override;
  std::vector<std::vector<double>> eval_goals(std::size_t count) const override;
  Trajectory behavior_trajectory(Random& rng) const override;
  std::unique_ptr<GoalPolicy> oracle_policy() const override;

  int width() const { return static_cast<int>(layout_.front().size()); }
  int height() const { return static_cast<int>(layout_.size()); }
  bool free(Cell c) const;
  Cell cell_at(double x, double y) const;
  std::array<double, 2> center(Cell c) const;
  const std::vector<Cell>& free_cells() const { return free_cells_; }
  /// Shortest-path length in cells; -1 when unreachable.
  int distance(Cell from, Cell to) const;

  /// Waypoint-tracking acceleration toward `goal`. Ties between equally short
  /// routes are broken by `order`, a permutation of the four directions.
  std::array<double, 2> steer(std::span<const double> state, std::span<const double> goal,
                              const std::array<int, 4>& order) const;

 protected:
  /// Rolls the noisy controller toward `goal` from `state`, appending to the
  /// buffers, until within `stop_radius` of the goal position or `budget`
  /// steps have been taken. Returns the final state.
  std::vector<double> drive(std::vector<double> state, std::span<const double> goal,
                            double stop_radius, std::size_t budget, Random& rng,
                            std::vector<double>& states, std::vector<double>& actions) const;
  std::vector<double> cell_state(Cell c) const;

 private:
  std::size_t cell_index(Cell c) const;

  std::string name_;
  std::vector<std::string> layout_;
  Cell start_;
  std::size_t behavior_steps_;
  std::vector<Cell> free_cells_;
  std::vector<int> dist_;  // dist_[target * W * H + cell]
};

/// Maze with a shared entry corridor that forks into two disjoint corridors of
/// equal length, which rejoin in a short shared exit ending at the goal. Both
/// corridors arrive at the goal the same way, so the goal state does not
/// reveal which one was taken.
/// Behavior episodes run start -> goal, choosing a corridor with
/// probability 1/2.
class TwoCorridorMaze final : public PointMazeEnv {
 public:
  TwoCorridorMaze();

  std::vector<std::vector<double>> eval_goals(std::size_t count) const override;
  Trajectory behavior_trajectory(Random& rng) const override;

  /// +1 for the upper corridor, -1 for the lower one, 0 if the states visit
  /// neither or both.
  int corridor_of(const Matrix& states) const;
  Cell goal_cell() const { return {13, 2}; }
  int upper_row() const { return 1; }
  int lower_row() const { return 3; }
};

}  // namespace flowhiql
