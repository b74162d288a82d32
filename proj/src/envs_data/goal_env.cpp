#include "flowhiql/envs_data/goal_env.hpp"

#include <algorithm>
#include <cmath>

#include "flowhiql/envs_data/chain_env.hpp"
#include "flowhiql/envs_data/point_maze.hpp"
#include "flowhiql/errors.hpp"

namespace flowhiql {

std::vector<double> Trajectory::state(std::size_t t) const {
  const auto row = states.row(static_cast<Eigen::Index>(t));
  return std::vector<double>(row.data(), row.data() + row.size());
}

bool GoalEnv::success(std::span<const double> state, std::span<const double> goal) const {
  double sq = 0.0;
  for (std::size_t i = 0; i < position_dim(); ++i) {
    const double d = state[i] - goal[i];
    sq += d * d;
  }
  return std::sqrt(sq) <= goal_radius();
}

double GoalEnv::reward(std::span<const double> state, std::span<const double> goal) const {
  return success(state, goal) ? 0.0 : -1.0;
}

StepResult GoalEnv::step(std::span<const double> state, std::span<const double> action,
                         std::span<const double> goal) const {
  StepResult r;
  r.next_state = transition(state, action);
  r.terminal = success(state, goal);
  r.reward = r.terminal ? 0.0 : -1.0;
  return r;
}

bool GoalEnv::action_in_bounds(std::span<const double> action) const {
  if (action.size() != action_dim()) return false;
  for (double a : action) {
    if (!(a >= -1.0 && a <= 1.0)) return false;
  }
  return true;
}

double truncated_normal(Random& rng, double mean, double sigma, double lo, double hi) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double x = mean + sigma * rng.normal();
    if (x >= lo && x <= hi) return x;
  }
  // Only reachable when the mean sits many sigmas outside [lo, hi].
  return std::clamp(mean, lo, hi);
}

std::unique_ptr<GoalEnv> make_env(const std::string& descriptor) {
  if (descriptor == "chain") return std::make_unique<ChainEnv>(5);
  if (descriptor.rfind("chain:", 0) == 0) {
    std::size_t cells = 0;
    try {
      cells = std::stoul(descriptor.substr(6));
    } catch (const std::exception&) {
      throw ArgumentError("bad chain descriptor '" + descriptor + "'");
    }
    return std::make_unique<ChainEnv>(cells);
  }
  if (descriptor == "point_maze") return std::make_unique<PointMazeEnv>(PointMazeEnv::simple());
  if (descriptor == "two_corridor") return std::make_unique<TwoCorridorMaze>();
  throw ArgumentError("unknown environment '" + descriptor + "'");
}

}  // namespace flowhiql
