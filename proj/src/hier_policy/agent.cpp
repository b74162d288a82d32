#include "flowhiql/hier_policy/agent.hpp"

#include "flowhiql/errors.hpp"

namespace flowhiql {

HierarchicalAgent::HierarchicalAgent(const PolicyHead& high, const PolicyHead& low,
                                     std::size_t k, double high_noise, double low_noise)
    : high_(high), low_(low), k_(k), high_noise_(high_noise), low_noise_(low_noise) {
  if (k == 0) throw ArgumentError("k must be at least 1");
}

void HierarchicalAgent::reset(const Matrix& start_states, const Matrix& goals) {
  goals_ = goals;
  subgoals_ = start_states;
}

Matrix HierarchicalAgent::act(const Matrix& states, std::size_t step, Random& rng) {
  if (states.rows() != goals_.rows()) throw ConfigError("agent was reset with a different batch");
  if (step % k_ == 0) {
    subgoals_ = high_.density().sample_batch(high_.params(), concat_rows(states, goals_), rng,
                                             high_noise_);
  }
  Matrix a = low_.density().sample_batch(low_.params(), concat_rows(states, subgoals_), rng,
                                         low_noise_);
  return a.cwiseMax(-1.0).cwiseMin(1.0);
}

std::vector<double> act(const PolicyHead& high, const PolicyHead& low, std::span<const double> s,
                        std::span<const double> g, Random& rng, std::size_t step_in_episode,
                        std::size_t k, std::vector<double>& subgoal, double high_noise,
                        double low_noise) {
  const auto n = static_cast<Eigen::Index>(s.size());
  HierarchicalAgent agent(high, low, k, high_noise, low_noise);
  Matrix states = Eigen::Map<const Matrix>(s.data(), 1, n);
  Matrix goals = Eigen::Map<const Matrix>(g.data(), 1, static_cast<Eigen::Index>(g.size()));
  agent.reset(states, goals);
  if (step_in_episode % k != 0) {
    if (subgoal.size() != s.size()) throw ConfigError("cached subgoal has the wrong dimension");
    Matrix cached = Eigen::Map<const Matrix>(subgoal.data(), 1, n);
    agent.reset(cached, goals);
  }
  const Matrix a = agent.act(states, step_in_episode, rng);
  const Matrix& sg = agent.subgoals();
  subgoal.assign(sg.data(), sg.data() + sg.size());
  return std::vector<double>(a.data(), a.data() + a.size());
}

}  // namespace flowhiql
