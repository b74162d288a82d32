#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowhiql/envs_data/samplers.hpp"

namespace flowhiql {

/// Every hyperparameter of a training run.
struct TrainConfig {
  // [run]
  std::string env = "chain";
  std::string family = "flow";  // "flow" or "gaussian"
  std::uint64_t seed = 0;
  std::size_t steps = 20000;
  std::size_t eval_interval = 2000;
  std::size_t checkpoint_interval = 0;  // 0: same as eval_interval
  double dataset_fraction = 1.0;

  // [hiql]
  std::size_t k = 5;
  double beta = 3.0;
  double w_max = 100.0;
  double tau = 0.7;
  double gamma = 0.99;
  double polyak = 0.005;
  std::size_t batch_size = 256;
  double grad_clip = 10.0;

  // [optim]
  double lr_value = 3e-4;
  double lr_high = 3e-4;
  double lr_low = 3e-4;

  // [relabel]
  double p_geometric = 0.7;
  double p_uniform = 0.2;
  double p_final = 0.1;

  // [network]
  std::vector<std::size_t> value_hidden{64, 64};
  std::vector<std::size_t> policy_hidden{64, 64};
  std::size_t flow_layers = 4;
  double scale_clamp = 3.0;
  double translate_clamp = 5.0;
  double log_std_clamp = 5.0;

  // [eval]
  std::size_t eval_goals = 20;
  std::size_t eval_episodes = 1;  // per goal
  double eval_high_noise = 1.0;
  double eval_low_noise = 0.0;

  /// Throws ArgumentError on out-of-range values.
  void validate() const;
  std::size_t effective_checkpoint_interval() const {
    return checkpoint_interval == 0 ? eval_interval : checkpoint_interval;
  }
  RelabelOptions relabel() const { return {p_geometric, p_uniform, p_final, gamma}; }
};

}  // namespace flowhiql
