#pragma once

#include <vector>

#include "flowhiql/batches.hpp"
#include "flowhiql/envs_data/dataset.hpp"

namespace flowhiql {

/// Hindsight goal mixture. Probabilities must be non-negative and sum to 1.
struct RelabelOptions {
  double p_geometric = 0.7;
  double p_uniform = 0.2;
  double p_final = 0.1;
  double gamma = 0.99;  // geometric offsets use p = 1 - gamma
};

/// Draws transitions uniformly over the dataset and relabels goals from the
/// same trajectory. Every batch first draws its n anchor transitions, then
/// the per-row goals, so the anchors of a batch depend only on the seed.
class BatchSampler {
 public:
  BatchSampler(const OfflineDataset& ds, const GoalEnv& env, RelabelOptions options = {});

  ValueBatch value_batch(Random& rng, std::size_t n) const;
  HighBatch high_batch(Random& rng, std::size_t n, std::size_t k) const;
  LowBatch low_batch(Random& rng, std::size_t n, std::size_t k) const;

  const OfflineDataset& dataset() const { return ds_; }
  const RelabelOptions& options() const { return options_; }

 private:
  struct Anchor {
    std::size_t trajectory;
    std::size_t t;
  };
  std::vector<Anchor> anchors(Random& rng, std::size_t n) const;
  /// Goal index on a trajectory of length T: geometric offsets start at t,
  /// uniform goals lie in [uniform_lo, T], and the final mode picks T.
  std::pair<std::size_t, GoalMode> relabel(Random& rng, std::size_t t, std::size_t uniform_lo,
                                           std::size_t T) const;

  const OfflineDataset& ds_;
  const GoalEnv& env_;
  RelabelOptions options_;
  std::vector<std::size_t> cumulative_;  // transitions before trajectory i
};

}  // namespace flowhiql
