#include "flowhiql/flow_core/weighted_nll.hpp"

#include <cmath>

#include "flowhiql/errors.hpp"

namespace flowhiql {

Tape::Var weighted_nll_node(Tape& tape, const ConditionalDensity& density,
                            const ParamStore& params, const WeightedBatch& batch) {
  const auto n = batch.x.rows();
  if (n == 0) throw ArgumentError("weighted NLL on an empty batch");
  if (static_cast<std::size_t>(n) != batch.weight.size()) {
    throw ConfigError("weighted NLL: weight count does not match batch size");
  }
  Matrix w(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double wi = batch.weight[static_cast<std::size_t>(i)];
    if (!std::isfinite(wi) || wi < 0.0) {
      throw ArgumentError("weighted NLL: weights must be finite and non-negative");
    }
    w(i, 0) = wi;
  }
  Tape::Var lp = density.log_prob_node(tape, params, tape.constant(batch.x),
                                       tape.constant(batch.context));
  return tape.scale(tape.sum(tape.mul(tape.constant(std::move(w)), lp)),
                    -1.0 / static_cast<double>(n));
}

double weighted_nll_loss(const ConditionalDensity& density, const ParamStore& params,
                         const WeightedBatch& batch) {
  Tape tape;
  return tape.scalar(weighted_nll_node(tape, density, params, batch));
}

ValueAndGrad weighted_nll_value_and_grad(const ConditionalDensity& density,
                                         const ParamStore& params, const WeightedBatch& batch) {
  return value_and_grad(
      [&](Tape& tape) { return weighted_nll_node(tape, density, params, batch); }, params);
}

}  // namespace flowhiql
