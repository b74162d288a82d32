#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flowhiql/tensor_nn/param_store.hpp"

namespace flowhiql {

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_params(const ParamStore& params, double lr);
};

/// One bias-corrected Adam update. A non-finite gradient rejects the step
/// (nothing is modified) and throws NumericError naming the segment.
void adam_step(AdamState& state, ParamStore& params, std::span<const double> grad);

/// Rescales `grad` in place so its L2 norm is at most `max_norm`; returns the
/// norm before clipping.
double clip_grad_norm(std::span<double> grad, double max_norm);

/// target <- (1 - rate) * target + rate * online
void polyak_update(ParamStore& target, const ParamStore& online, double rate);

}  // namespace flowhiql
