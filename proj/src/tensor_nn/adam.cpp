#include "flowhiql/tensor_nn/adam.hpp"

#include <cmath>

#include "flowhiql/errors.hpp"

namespace flowhiql {

AdamState AdamState::for_params(const ParamStore& params, double lr) {
  AdamState s;
  s.m.assign(params.size(), 0.0);
  s.v.assign(params.size(), 0.0);
  s.lr = lr;
  return s;
}

void adam_step(AdamState& state, ParamStore& params, std::span<const double> grad) {
  const std::size_t n = params.size();
  if (grad.size() != n || state.m.size() != n || state.v.size() != n) {
    throw ConfigError("adam_step: length mismatch between state, parameters and gradient");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(grad[i])) {
      throw NumericError(params.segment_at(i).name, "non-finite gradient; adam step rejected");
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  auto theta = params.flat();
  for (std::size_t i = 0; i < n; ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    theta[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
  params.bump_version();
}

double clip_grad_norm(std::span<double> grad, double max_norm) {
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (double& g : grad) g *= s;
  }
  return norm;
}

void polyak_update(ParamStore& target, const ParamStore& online, double rate) {
  if (!target.same_layout(online)) throw ConfigError("polyak_update: layout mismatch");
  if (!(rate > 0.0 && rate <= 1.0)) throw ArgumentError("polyak_update: rate must be in (0, 1]");
  auto t = target.flat();
  auto o = online.flat();
  if (rate == 1.0) {
    std::copy(o.begin(), o.end(), t.begin());
  } else {
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = (1.0 - rate) * t[i] + rate * o[i];
  }
  target.bump_version();
}

}  // namespace flowhiql
