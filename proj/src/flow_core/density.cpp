#include "flowhiql/flow_core/density.hpp"

#include <cmath>
#include <numbers>

#include "flowhiql/errors.hpp"

namespace flowhiql {

Eigen::VectorXd standard_normal_log_density(const Matrix& u) {
  const double c = 0.5 * static_cast<double>(u.cols()) * std::log(2.0 * std::numbers::pi);
  return (-0.5 * u.rowwise().squaredNorm()).array() - c;
}

void ConditionalDensity::check_inputs(const Matrix& x, const Matrix& context) const {
  if (static_cast<std::size_t>(x.cols()) != dim()) {
    throw ConfigError("density input has " + std::to_string(x.cols()) + " columns, expected " +
                      std::to_string(dim()));
  }
  if (static_cast<std::size_t>(context.cols()) != context_dim()) {
    throw ConfigError("context has " + std::to_string(context.cols()) + " columns, expected " +
                      std::to_string(context_dim()));
  }
  if (x.rows() != context.rows()) throw ConfigError("input and context row counts differ");
}

Matrix ConditionalDensity::log_prob(const ParamStore& params, const Matrix& x,
                                    const Matrix& context) const {
  check_inputs(x, context);
  Matrix out(x.rows(), 1);
  for (Eigen::Index r0 = 0; r0 < x.rows(); r0 += kEvalChunkRows) {
    const Eigen::Index n = std::min(kEvalChunkRows, x.rows() - r0);
    Tape tape;
    Tape::Var lp = log_prob_node(tape, params, tape.constant(x.middleRows(r0, n)),
                                 tape.constant(context.middleRows(r0, n)));
    out.middleRows(r0, n) = tape.value(lp);
  }
  return out;
}

double ConditionalDensity::log_prob(const ParamStore& params, std::span<const double> x,
                                    std::span<const double> context) const {
  Matrix xm = Eigen::Map<const Matrix>(x.data(), 1, static_cast<Eigen::Index>(x.size()));
  Matrix cm(1, static_cast<Eigen::Index>(context.size()));
  for (std::size_t j = 0; j < context.size(); ++j) cm(0, static_cast<Eigen::Index>(j)) = context[j];
  return log_prob(params, xm, cm)(0, 0);
}

DensitySample ConditionalDensity::sample(const ParamStore& params,
                                         std::span<const double> context, Random& rng) const {
  Matrix u(1, static_cast<Eigen::Index>(dim()));
  for (Eigen::Index j = 0; j < u.cols(); ++j) u(0, j) = rng.normal();
  Matrix cm(1, static_cast<Eigen::Index>(context.size()));
  for (std::size_t j = 0; j < context.size(); ++j) cm(0, static_cast<Eigen::Index>(j)) = context[j];
  Matrix lp;
  Matrix x = push_forward(params, u, cm, &lp);
  return DensitySample{std::vector<double>(x.data(), x.data() + x.size()), lp(0, 0)};
}

Matrix ConditionalDensity::sample_batch(const ParamStore& params, const Matrix& context,
                                        Random& rng, double noise_scale) const {
  Matrix u(context.rows(), static_cast<Eigen::Index>(dim()));
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) u(i, j) = noise_scale * rng.normal();
  }
  return push_forward(params, u, context, nullptr);
}

}  // namespace flowhiql
