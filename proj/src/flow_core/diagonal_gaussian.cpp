#include "flowhiql/flow_core/diagonal_gaussian.hpp"

#include <cmath>
#include <numbers>

#include "flowhiql/errors.hpp"

namespace flowhiql {

DiagonalGaussian::DiagonalGaussian(ParamStore& store, const std::string& prefix, std::size_t dim,
                                   std::size_t context_dim, std::vector<std::size_t> hidden,
                                   double log_std_clamp)
    : dim_(dim), context_dim_(context_dim) {
  if (dim == 0 || context_dim == 0) throw ConfigError("gaussian head needs nonzero dimensions");
  std::vector<std::size_t> sizes{context_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(dim);
  mean_net_ = Mlp(store, prefix + ".mean", sizes);
  log_std_net_ = Mlp(store, prefix + ".log_std", sizes, OutputActivation::kScaledTanh, log_std_clamp);
}

void DiagonalGaussian::initialize(ParamStore& params, Random& rng) const {
  mean_net_.initialize(params, rng, true);
  log_std_net_.initialize(params, rng, true);
}

Tape::Var DiagonalGaussian::log_prob_node(Tape& tape, const ParamStore& params, Tape::Var x,
                                          Tape::Var context) const {
  Tape::Var mean = mean_net_.forward(tape, params, context);
  Tape::Var log_std = log_std_net_.forward(tape, params, context);
  Tape::Var u = tape.mul(tape.sub(x, mean), tape.exp(tape.scale(log_std, -1.0)));
  const double c = 0.5 * static_cast<double>(dim_) * std::log(2.0 * std::numbers::pi);
  Tape::Var base = tape.add_scalar(tape.scale(tape.row_sum(tape.square(u)), -0.5), -c);
  return tape.sub(base, tape.row_sum(log_std));
}

Matrix DiagonalGaussian::push_forward(const ParamStore& params, const Matrix& noise,
                                      const Matrix& context, Matrix* log_prob) const {
  check_inputs(noise, context);
  Matrix mean = mean_net_.forward(params, context);
  Matrix log_std = log_std_net_.forward(params, context);
  Matrix x = mean + (log_std.array().exp() * noise.array()).matrix();
  if (log_prob) {
    *log_prob = standard_normal_log_density(noise) - log_std.rowwise().sum();
  }
  return x;
}

}  // namespace flowhiql
