#pragma once

#include <vector>

#include "flowhiql/flow_core/density.hpp"

namespace flowhiql {

struct WeightedBatch {
  Matrix x;
  Matrix context;
  std::vector<double> weight;
};

/// -(1/n) * sum_i weight_i * log p(x_i | context_i) as a scalar node.
/// Weights enter as constants.
Tape::Var weighted_nll_node(Tape& tape, const ConditionalDensity& density,
                            const ParamStore& params, const WeightedBatch& batch);

double weighted_nll_loss(const ConditionalDensity& density, const ParamStore& params,
                         const WeightedBatch& batch);

ValueAndGrad weighted_nll_value_and_grad(const ConditionalDensity& density,
                                         const ParamStore& params, const WeightedBatch& batch);

}  // namespace flowhiql
