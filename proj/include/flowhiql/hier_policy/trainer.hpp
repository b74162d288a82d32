#pragma once

#include <functional>
#include <vector>

#include "flowhiql/envs_data/dataset.hpp"
#include "flowhiql/envs_data/evaluate.hpp"
#include "flowhiql/envs_data/samplers.hpp"
#include "flowhiql/hier_policy/policy_updates.hpp"

namespace flowhiql {

/// One metrics row; losses are averaged over the iterations since the
/// previous row.
struct MetricsRow {
  std::size_t step = 0;
  double loss_v = 0.0;
  double loss_h = 0.0;
  double loss_l = 0.0;
  double success_rate = 0.0;
};

struct IterationLosses {
  double value = 0.0;
  double high = 0.0;
  double low = 0.0;
};

/// Offline HIQL with density policies. Each iteration draws its three
/// batches from Random(seed, step + 1), so a run can be resumed from its
/// parameters, optimizer moments and step count alone.
class Trainer {
 public:
  /// `dataset` must already have the configured fraction applied and must
  /// outlive the trainer, as must `env`.
  Trainer(const TrainConfig& config, const OfflineDataset& dataset, const GoalEnv& env);

  IterationLosses iteration();
  /// Runs up to config.steps iterations, emitting a row every eval_interval
  /// steps and at the final step. `on_checkpoint` fires after the row
  /// callback at every checkpoint boundary and at the final step.
  std::vector<MetricsRow> run(const std::function<void(const MetricsRow&)>& on_row = {},
                              const std::function<void(std::size_t)>& on_checkpoint = {});

  /// Success rate of the current policies on the configured evaluation goals.
  EvalResult evaluate_policies(Random& rng) const;

  /// Every piece of training state as one ParamStore.
  ParamStore snapshot() const;
  void restore(const ParamStore& snapshot);

  std::size_t step() const { return step_; }
  const TrainConfig& config() const { return config_; }
  const ValueFunction& value_function() const { return vf_; }
  ValueFunction& value_function() { return vf_; }
  const PolicyHead& high() const { return high_; }
  const PolicyHead& low() const { return low_; }
  PolicyHead& high() { return high_; }
  PolicyHead& low() { return low_; }
  const BatchSampler& sampler() const { return sampler_; }

 private:
  TrainConfig config_;
  const GoalEnv& env_;
  BatchSampler sampler_;
  Random init_rng_;
  ValueFunction vf_;
  PolicyHead high_;
  PolicyHead low_;
  AdamState adam_v_;
  AdamState adam_h_;
  AdamState adam_l_;
  std::size_t step_ = 0;
  // Loss sums and iteration count since the last metrics row.
  double sum_v_ = 0.0;
  double sum_h_ = 0.0;
  double sum_l_ = 0.0;
  std::size_t pending_ = 0;
};

/// Builds a trainer and runs it to completion.
std::vector<MetricsRow> train(const TrainConfig& config, const OfflineDataset& dataset,
                              const GoalEnv& env);

/// Stream used for the evaluation RNG at a given training step.
std::uint64_t eval_stream(std::size_t step);

/// Rebuilds the policies stored in a trainer snapshot without a dataset.
struct PolicyPair {
  PolicyHead high;
  PolicyHead low;
};
PolicyPair load_policies(const TrainConfig& config, const GoalEnv& env, const ParamStore& snapshot);

}  // namespace flowhiql
