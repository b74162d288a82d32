#pragma once

#include <span>
#include <vector>

#include "flowhiql/batches.hpp"
#include "flowhiql/random.hpp"
#include "flowhiql/tensor_nn/adam.hpp"
#include "flowhiql/tensor_nn/mlp.hpp"

namespace flowhiql {

/// |tau - 1{diff < 0}| * diff^2
double expectile_loss(double diff, double tau);

/// r + gamma * v_next_target, or r alone for terminal transitions.
double td_target(double reward, double gamma, double v_next_target, bool terminal = false);

/// Goal-conditioned value V(s, g) with an online and a slow target copy.
class ValueFunction {
 public:
  ValueFunction(std::size_t state_dim, const std::vector<std::size_t>& hidden, Random& init_rng);

  std::size_t state_dim() const { return state_dim_; }
  const Mlp& net() const { return net_; }
  ParamStore& online() { return online_; }
  const ParamStore& online() const { return online_; }
  ParamStore& target() { return target_; }
  const ParamStore& target() const { return target_; }

  /// V over rows of (s, g); `use_target` selects the target copy.
  Eigen::VectorXd value(const Matrix& s, const Matrix& g, bool use_target = false) const;
  double value(std::span<const double> s, std::span<const double> g,
               bool use_target = false) const;

  /// Online V(s, g) as an n x 1 tape node.
  Tape::Var value_node(Tape& tape, const Matrix& s, const Matrix& g) const;

 private:
  std::size_t state_dim_;
  ParamStore online_;
  Mlp net_;
  ParamStore target_;
};

struct ValueUpdateOptions {
  double tau = 0.7;
  double gamma = 0.99;
  double polyak = 0.005;
  double grad_clip = 10.0;
};

/// Mean expectile loss of TD targets built from the target network.
ValueAndGrad value_loss_and_grad(const ValueFunction& vf, const ValueBatch& batch,
                                 const ValueUpdateOptions& options);

/// One Adam step on the mean expectile loss followed by a Polyak update of
/// the target copy. Returns the loss before the step.
double value_update(ValueFunction& vf, AdamState& adam, const ValueBatch& batch,
                    const ValueUpdateOptions& options);

}  // namespace flowhiql
