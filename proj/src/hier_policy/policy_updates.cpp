#include "flowhiql/hier_policy/policy_updates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flowhiql/errors.hpp"
#include "flowhiql/flow_core/coupling_flow.hpp"
#include "flowhiql/flow_core/diagonal_gaussian.hpp"

namespace flowhiql {

namespace {

double weighted_step(PolicyHead& head, AdamState& adam, const WeightedBatch& wb,
                     double grad_clip) {
  ValueAndGrad vg = weighted_nll_value_and_grad(head.density(), head.params(), wb);
  clip_grad_norm(vg.grad, grad_clip);
  adam_step(adam, head.params(), vg.grad);
  return vg.value;
}

WeightedBatch weigh(Matrix x, Matrix context, const Eigen::VectorXd& adv, double beta,
                    double w_max) {
  WeightedBatch wb{std::move(x), std::move(context), {}};
  wb.weight.resize(static_cast<std::size_t>(adv.size()));
  for (Eigen::Index i = 0; i < adv.size(); ++i) {
    wb.weight[static_cast<std::size_t>(i)] = awr_weight(adv(i), beta, w_max);
  }
  return wb;
}

}  // namespace

PolicyHead::PolicyHead(const std::string& family, const std::string& name, std::size_t dim,
                       std::size_t context_dim, const TrainConfig& config, Random& init_rng) {
  if (family == "flow") {
    FlowConfig fc;
    fc.dim = dim;
    fc.context_dim = context_dim;
    fc.num_layers = config.flow_layers;
    fc.hidden = config.policy_hidden;
    fc.scale_clamp = config.scale_clamp;
    fc.translate_clamp = config.translate_clamp;
    density_ = std::make_unique<ConditionalFlow>(params_, name, fc);
  } else if (family == "gaussian") {
    density_ = std::make_unique<DiagonalGaussian>(params_, name, dim, context_dim,
                                                  config.policy_hidden, config.log_std_clamp);
  } else {
    throw ConfigError("unknown policy family '" + family + "'");
  }
  density_->initialize(params_, init_rng);
}

double high_advantage(const ValueFunction& vf, std::span<const double> s,
                      std::span<const double> s_k, std::span<const double> g) {
  return vf.value(s_k, g) - vf.value(s, g);
}

double low_advantage(const ValueFunction& vf, std::span<const double> s,
                     std::span<const double> s_next, std::span<const double> s_k) {
  return vf.value(s_next, s_k) - vf.value(s, s_k);
}

Eigen::VectorXd high_advantages(const ValueFunction& vf, const HighBatch& batch) {
  return vf.value(batch.s_k, batch.g) - vf.value(batch.s, batch.g);
}

Eigen::VectorXd low_advantages(const ValueFunction& vf, const LowBatch& batch) {
  return vf.value(batch.s_next, batch.s_k) - vf.value(batch.s, batch.s_k);
}

double awr_weight(double adv, double beta, double w_max) {
  if (!(beta >= 0.0)) throw ArgumentError("beta must be >= 0");
  // Clamp the exponent on both sides: large advantages must not overflow and
  // very negative ones must not underflow to a zero weight.
  static const double kLogMin = std::log(std::numeric_limits<double>::min());
  return std::min(std::exp(std::clamp(beta * adv, kLogMin, std::log(w_max))), w_max);
}

Matrix concat_rows(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ConfigError("row count mismatch in concatenation");
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

WeightedBatch high_weighted_batch(const ValueFunction& vf, const HighBatch& batch, double beta,
                                  double w_max) {
  return weigh(batch.s_k, concat_rows(batch.s, batch.g), high_advantages(vf, batch), beta, w_max);
}

WeightedBatch low_weighted_batch(const ValueFunction& vf, const LowBatch& batch, double beta,
                                 double w_max) {
  return weigh(batch.a, concat_rows(batch.s, batch.s_k), low_advantages(vf, batch), beta, w_max);
}

double high_policy_update(PolicyHead& hp, AdamState& adam, const ValueFunction& vf,
                          const HighBatch& batch, const PolicyUpdateOptions& options) {
  return weighted_step(hp, adam, high_weighted_batch(vf, batch, options.beta, options.w_max),
                       options.grad_clip);
}

double low_policy_update(PolicyHead& lp, AdamState& adam, const ValueFunction& vf,
                         const LowBatch& batch, const PolicyUpdateOptions& options) {
  return weighted_step(lp, adam, low_weighted_batch(vf, batch, options.beta, options.w_max),
                       options.grad_clip);
}

}  // namespace flowhiql
