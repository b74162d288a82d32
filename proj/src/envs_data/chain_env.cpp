#include "flowhiql/envs_data/chain_env.hpp"

#include <algorithm>
#include <cmath>

#include "flowhiql/errors.hpp"

namespace flowhiql {

namespace {

constexpr double kDeadZone = 1.0 / 3.0;
constexpr double kLateralGain = 0.25;
constexpr double kBehaviorDrive = 0.8;

class ChainOracle final : public GoalPolicy {
 public:
  void reset(const Matrix&, const Matrix& goals) override { goals_ = goals; }
  Matrix act(const Matrix& states, std::size_t, Random&) override {
    Matrix a = Matrix::Zero(states.rows(), 2);
    for (Eigen::Index i = 0; i < states.rows(); ++i) {
      const double dx = goals_(i, 0) - states(i, 0);
      if (dx > 0.5) a(i, 0) = 1.0;
      if (dx < -0.5) a(i, 0) = -1.0;
    }
    return a;
  }

 private:
  Matrix goals_;
};

}  // namespace

ChainEnv::ChainEnv(std::size_t cells) : cells_(cells) {
  if (cells < 2) throw ArgumentError("chain needs at least 2 cells");
}

std::string ChainEnv::descriptor() const {
  return cells_ == 5 ? "chain" : "chain:" + std::to_string(cells_);
}

double ChainEnv::cell_x(std::size_t i) const {
  return static_cast<double>(i) - 0.5 * static_cast<double>(cells_ - 1);
}

std::size_t ChainEnv::cell_of(double x) const {
  const double i = std::round(x + 0.5 * static_cast<double>(cells_ - 1));
  return static_cast<std::size_t>(std::clamp(i, 0.0, static_cast<double>(cells_ - 1)));
}

double ChainEnv::state_norm_bound() const {
  const double half = 0.5 * static_cast<double>(cells_ - 1);
  return std::sqrt(half * half + 1.0);
}

std::vector<double> ChainEnv::transition(std::span<const double> state,
                                         std::span<const double> action) const {
  const double a0 = std::clamp(action[0], -1.0, 1.0);
  const double a1 = std::clamp(action[1], -1.0, 1.0);
  std::size_t i = cell_of(state[0]);
  if (a0 > kDeadZone && i + 1 < cells_) ++i;
  if (a0 < -kDeadZone && i > 0) --i;
  return {cell_x(i), std::clamp(state[1] + kLateralGain * a1, -1.0, 1.0)};
}

std::vector<double> ChainEnv::start_state() const { return {cell_x(0), 0.0}; }

std::vector<std::vector<double>> ChainEnv::eval_goals(std::size_t count) const {
  std::vector<std::vector<double>> goals;
  for (std::size_t j = 0; j < count; ++j) goals.push_back({cell_x(1 + j % (cells_ - 1)), 0.0});
  return goals;
}

// Random start cell and lateral offset; walks toward a random target cell,
// picking a new target each time one is reached.
Trajectory ChainEnv::behavior_trajectory(Random& rng) const {
  const std::size_t horizon = max_episode_steps();
  Trajectory traj;
  traj.states.resize(static_cast<Eigen::Index>(horizon + 1), 2);
  traj.actions.resize(static_cast<Eigen::Index>(horizon), 2);
  std::vector<double> s{cell_x(rng.index(cells_)), rng.uniform(-1.0, 1.0)};
  std::size_t target = cell_of(s[0]);
  for (std::size_t t = 0; t < horizon; ++t) {
    const std::size_t here = cell_of(s[0]);
    while (target == here) target = rng.index(cells_);
    const double drive = target > here ? kBehaviorDrive : -kBehaviorDrive;
    const std::vector<double> a{truncated_normal(rng, drive, kBehaviorNoise, -1.0, 1.0),
                                truncated_normal(rng, 0.0, kBehaviorNoise, -1.0, 1.0)};
    traj.states.row(static_cast<Eigen::Index>(t)) << s[0], s[1];
    traj.actions.row(static_cast<Eigen::Index>(t)) << a[0], a[1];
    s = transition(s, a);
  }
  traj.states.row(static_cast<Eigen::Index>(horizon)) << s[0], s[1];
  return traj;
}

std::unique_ptr<GoalPolicy> ChainEnv::oracle_policy() const {
  return std::make_unique<ChainOracle>();
}

}  // namespace flowhiql
