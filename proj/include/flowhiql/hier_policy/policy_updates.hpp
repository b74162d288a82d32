#pragma once

#include <memory>
#include <span>
#include <string>

#include "flowhiql/batches.hpp"
#include "flowhiql/flow_core/density.hpp"
#include "flowhiql/flow_core/weighted_nll.hpp"
#include "flowhiql/hier_policy/train_config.hpp"
#include "flowhiql/value_learner/value_function.hpp"

namespace flowhiql {

/// A conditional density together with the parameters it reads.
class PolicyHead {
 public:
  /// `family` selects a ConditionalFlow ("flow") or a DiagonalGaussian
  /// ("gaussian"); both use the network settings of `config`.
  PolicyHead(const std::string& family, const std::string& name, std::size_t dim,
             std::size_t context_dim, const TrainConfig& config, Random& init_rng);

  const ConditionalDensity& density() const { return *density_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

 private:
  ParamStore params_;
  std::unique_ptr<ConditionalDensity> density_;
};

/// V(s_{t+k}, g) - V(s_t, g)
double high_advantage(const ValueFunction& vf, std::span<const double> s,
                      std::span<const double> s_k, std::span<const double> g);
/// V(s_{t+1}, s_{t+k}) - V(s_t, s_{t+k})
double low_advantage(const ValueFunction& vf, std::span<const double> s,
                     std::span<const double> s_next, std::span<const double> s_k);

Eigen::VectorXd high_advantages(const ValueFunction& vf, const HighBatch& batch);
Eigen::VectorXd low_advantages(const ValueFunction& vf, const LowBatch& batch);

/// min(exp(beta * adv), w_max), never below the smallest normal double
double awr_weight(double adv, double beta, double w_max);

/// Row-wise [a, b].
Matrix concat_rows(const Matrix& a, const Matrix& b);

/// Subgoal targets s_{t+k} with context (s_t, g) and advantage weights.
WeightedBatch high_weighted_batch(const ValueFunction& vf, const HighBatch& batch, double beta,
                                  double w_max);
/// Actions a_t with context (s_t, s_{t+k}) and advantage weights.
WeightedBatch low_weighted_batch(const ValueFunction& vf, const LowBatch& batch, double beta,
                                 double w_max);

struct PolicyUpdateOptions {
  double beta = 3.0;
  double w_max = 100.0;
  double grad_clip = 10.0;
};

/// One Adam step on the advantage-weighted NLL. The weights are computed
/// from the online value network and enter the loss as constants. Returns
/// the loss before the step.
double high_policy_update(PolicyHead& hp, AdamState& adam, const ValueFunction& vf,
                          const HighBatch& batch, const PolicyUpdateOptions& options);
double low_policy_update(PolicyHead& lp, AdamState& adam, const ValueFunction& vf,
                         const LowBatch& batch, const PolicyUpdateOptions& options);

}  // namespace flowhiql
