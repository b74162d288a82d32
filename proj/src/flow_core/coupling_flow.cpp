#include "flowhiql/flow_core/coupling_flow.hpp"

#include <cmath>
#include <numbers>

#include "flowhiql/errors.hpp"

namespace flowhiql {

ConditionalFlow::ConditionalFlow(ParamStore& store, const std::string& prefix, FlowConfig config)
    : config_(std::move(config)) {
  if (config_.dim < 2) {
    throw ConfigError("coupling flows need at least 2 output dimensions (got " +
                      std::to_string(config_.dim) + ")");
  }
  if (config_.clamped && !(config_.scale_clamp > 0.0 && config_.translate_clamp > 0.0)) {
    throw ConfigError("flow clamps must be positive");
  }
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    CouplingLayer layer;
    layer.mask.resize(config_.dim);
    for (std::size_t i = 0; i < config_.dim; ++i) {
      layer.mask[i] = (i % 2) == (l % 2);
      (layer.mask[i] ? layer.pass : layer.transformed).push_back(i);
    }
    std::vector<std::size_t> sizes{layer.pass.size() + config_.context_dim};
    sizes.insert(sizes.end(), config_.hidden.begin(), config_.hidden.end());
    sizes.push_back(layer.transformed.size());
    const std::string base = prefix + ".c" + std::to_string(l);
    if (config_.clamped) {
      layer.scale_net = Mlp(store, base + ".scale", sizes, OutputActivation::kScaledTanh,
                            config_.scale_clamp);
      layer.shift_net = Mlp(store, base + ".shift", sizes, OutputActivation::kScaledTanh,
                            config_.translate_clamp);
    } else {
      layer.scale_net = Mlp(store, base + ".scale", sizes);
      layer.shift_net = Mlp(store, base + ".shift", sizes);
    }
    layers_.push_back(std::move(layer));
  }
}

void ConditionalFlow::initialize(ParamStore& params, Random& rng) const {
  for (const CouplingLayer& layer : layers_) {
    layer.scale_net.initialize(params, rng, true);
    layer.shift_net.initialize(params, rng, true);
  }
}

Tape::Var ConditionalFlow::couple(Tape& tape, const ParamStore& params, const CouplingLayer& layer,
                                  Tape::Var in, Tape::Var context, bool inverse,
                                  Tape::Var* log_det) const {
  Tape::Var kept = tape.cols(in, layer.pass);
  Tape::Var net_in = config_.context_dim > 0 ? tape.concat_cols(kept, context) : kept;
  Tape::Var s = layer.scale_net.forward(tape, params, net_in);
  Tape::Var t = layer.shift_net.forward(tape, params, net_in);
  Tape::Var moved = tape.cols(in, layer.transformed);
  Tape::Var out_part;
  Tape::Var layer_log_det;
  if (!inverse) {
    out_part = tape.add(tape.mul(moved, tape.exp(s)), t);
    layer_log_det = tape.row_sum(s);
  } else {
    out_part = tape.mul(tape.sub(moved, t), tape.exp(tape.scale(s, -1.0)));
    layer_log_det = tape.scale(tape.row_sum(s), -1.0);
  }
  *log_det = tape.add(*log_det, layer_log_det);
  return tape.scatter_cols(kept, layer.pass, out_part, layer.transformed);
}

Tape::Var ConditionalFlow::inverse_node(Tape& tape, const ParamStore& params, Tape::Var x,
                                        Tape::Var context, Tape::Var* log_det) const {
  *log_det = tape.constant(Matrix::Zero(tape.value(x).rows(), 1));
  Tape::Var cur = x;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    cur = couple(tape, params, layers_[l], cur, context, true, log_det);
  }
  return cur;
}

Tape::Var ConditionalFlow::log_prob_node(Tape& tape, const ParamStore& params, Tape::Var x,
                                         Tape::Var context) const {
  Tape::Var log_det;
  Tape::Var u = inverse_node(tape, params, x, context, &log_det);
  const double c = 0.5 * static_cast<double>(config_.dim) * std::log(2.0 * std::numbers::pi);
  Tape::Var base = tape.add_scalar(tape.scale(tape.row_sum(tape.square(u)), -0.5), -c);
  return tape.add(base, log_det);
}

FlowResult ConditionalFlow::run(const ParamStore& params, const Matrix& in, const Matrix& context,
                                bool inverse, std::size_t first, std::size_t last) const {
  check_inputs(in, context);
  FlowResult result{Matrix(in.rows(), in.cols()), Eigen::VectorXd(in.rows())};
  for (Eigen::Index r0 = 0; r0 < in.rows(); r0 += kEvalChunkRows) {
    const Eigen::Index n = std::min(kEvalChunkRows, in.rows() - r0);
    Tape tape;
    Tape::Var cur = tape.constant(in.middleRows(r0, n));
    Tape::Var ctx = tape.constant(context.middleRows(r0, n));
    Tape::Var log_det = tape.constant(Matrix::Zero(n, 1));
    if (!inverse) {
      for (std::size_t l = first; l < last; ++l) {
        cur = couple(tape, params, layers_[l], cur, ctx, false, &log_det);
      }
    } else {
      for (std::size_t l = last; l-- > first;) {
        cur = couple(tape, params, layers_[l], cur, ctx, true, &log_det);
      }
    }
    result.value.middleRows(r0, n) = tape.value(cur);
    result.log_det.segment(r0, n) = tape.value(log_det).col(0);
  }
  return result;
}

FlowResult ConditionalFlow::forward(const ParamStore& params, const Matrix& u,
                                    const Matrix& context) const {
  return run(params, u, context, false, 0, layers_.size());
}

FlowResult ConditionalFlow::inverse(const ParamStore& params, const Matrix& x,
                                    const Matrix& context) const {
  return run(params, x, context, true, 0, layers_.size());
}

FlowResult ConditionalFlow::forward_layer(std::size_t index, const ParamStore& params,
                                          const Matrix& u, const Matrix& context) const {
  if (index >= layers_.size()) throw ConfigError("coupling layer index out of range");
  return run(params, u, context, false, index, index + 1);
}

Matrix ConditionalFlow::push_forward(const ParamStore& params, const Matrix& noise,
                                     const Matrix& context, Matrix* log_prob) const {
  FlowResult r = forward(params, noise, context);
  if (log_prob) *log_prob = standard_normal_log_density(noise) - r.log_det;
  return std::move(r.value);
}

EntropyEstimate ConditionalFlow::entropy_mc(const ParamStore& params,
                                            std::span<const double> context, std::size_t n,
                                            Random& rng) const {
  if (n < 2) throw ArgumentError("entropy_mc needs at least 2 samples");
  if (context.size() != config_.context_dim) throw ConfigError("entropy_mc: context size mismatch");
  const auto rows = static_cast<Eigen::Index>(n);
  Matrix u(rows, static_cast<Eigen::Index>(config_.dim));
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) u(i, j) = rng.normal();
  }
  Matrix ctx(rows, static_cast<Eigen::Index>(context.size()));
  for (std::size_t j = 0; j < context.size(); ++j) {
    ctx.col(static_cast<Eigen::Index>(j)).setConstant(context[j]);
  }
  FlowResult r = forward(params, u, ctx);
  Eigen::VectorXd h = -(standard_normal_log_density(u) - r.log_det);
  const double mean = h.mean();
  const double var = (h.array() - mean).square().sum() / static_cast<double>(n - 1);
  return EntropyEstimate{mean, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace flowhiql
