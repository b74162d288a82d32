#pragma once

#include <span>
#include <vector>

#include "flowhiql/envs_data/goal_env.hpp"
#include "flowhiql/hier_policy/policy_updates.hpp"

namespace flowhiql {

/// Two-level controller. A subgoal is drawn from the high policy every k
/// steps and cached in between; actions come from the low policy given the
/// cached subgoal and are clipped to [-1, 1].
///
/// Noise scales multiply the base noise: 1 samples, 0 gives the
/// deterministic image of u = 0.
class HierarchicalAgent final : public GoalPolicy {
 public:
  HierarchicalAgent(const PolicyHead& high, const PolicyHead& low, std::size_t k,
                    double high_noise = 1.0, double low_noise = 0.0);

  void reset(const Matrix& start_states, const Matrix& goals) override;
  Matrix act(const Matrix& states, std::size_t step, Random& rng) override;

  const Matrix& subgoals() const { return subgoals_; }

 private:
  const PolicyHead& high_;
  const PolicyHead& low_;
  std::size_t k_;
  double high_noise_;
  double low_noise_;
  Matrix goals_;
  Matrix subgoals_;
};

/// Single-state form: refreshes `subgoal` when step_in_episode % k == 0,
/// then returns a clipped action.
std::vector<double> act(const PolicyHead& high, const PolicyHead& low, std::span<const double> s,
                        std::span<const double> g, Random& rng, std::size_t step_in_episode,
                        std::size_t k, std::vector<double>& subgoal, double high_noise = 1.0,
                        double low_noise = 0.0);

}  // namespace flowhiql
