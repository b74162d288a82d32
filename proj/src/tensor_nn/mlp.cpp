#include "flowhiql/tensor_nn/mlp.hpp"

#include <cmath>

#include "flowhiql/errors.hpp"

namespace flowhiql {

Mlp::Mlp(ParamStore& store, const std::string& prefix, std::vector<std::size_t> sizes,
         OutputActivation output, double output_scale)
    : sizes_(std::move(sizes)), output_(output), output_scale_(output_scale) {
  if (sizes_.size() < 2) throw ConfigError("mlp '" + prefix + "' needs at least two layer sizes");
  for (std::size_t s : sizes_) {
    if (s == 0) throw ConfigError("mlp '" + prefix + "' has a zero-width layer");
  }
  if (output_ == OutputActivation::kScaledTanh && !(output_scale_ > 0.0)) {
    throw ConfigError("mlp '" + prefix + "' needs a positive output scale");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const std::string w = prefix + ".w" + std::to_string(l);
    const std::string b = prefix + ".b" + std::to_string(l);
    weights_.push_back(store.add_segment(w, {sizes_[l], sizes_[l + 1]}));
    biases_.push_back(store.add_segment(b, {sizes_[l + 1]}));
    names_.push_back(w);
  }
}

void Mlp::check_layout(const ParamStore& params) const {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (weights_[l] >= params.segment_count() || params.segment(weights_[l]).name != names_[l]) {
      throw ConfigError("parameter store layout does not match network '" + names_[l] + "'");
    }
  }
}

Tape::Var Mlp::forward(Tape& tape, const ParamStore& params, Tape::Var input) const {
  check_layout(params);
  if (static_cast<std::size_t>(tape.value(input).cols()) != input_size()) {
    throw ConfigError("mlp input has " + std::to_string(tape.value(input).cols()) +
                      " features, expected " + std::to_string(input_size()));
  }
  Tape::Var h = input;
  const std::size_t last = weights_.size() - 1;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    h = tape.affine(h, tape.param(params, weights_[l]), tape.param(params, biases_[l]));
    if (l < last) {
      h = tape.tanh(h);
    } else if (output_ == OutputActivation::kScaledTanh) {
      h = tape.scaled_tanh(h, output_scale_);
    }
  }
  return h;
}

Matrix Mlp::forward(const ParamStore& params, const Matrix& input) const {
  Tape tape;
  Tape::Var out = forward(tape, params, tape.constant(input));
  return tape.value(out);
}

std::vector<double> Mlp::forward(const ParamStore& params, std::span<const double> input) const {
  Matrix row = Eigen::Map<const Matrix>(input.data(), 1, static_cast<Eigen::Index>(input.size()));
  Matrix out = forward(params, row);
  return std::vector<double>(out.data(), out.data() + out.size());
}

void Mlp::initialize(ParamStore& params, Random& rng, bool zero_output_layer) const {
  check_layout(params);
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    auto w = params.values(weights_[l]);
    auto b = params.values(biases_[l]);
    const double bound = std::sqrt(3.0 / static_cast<double>(sizes_[l]));
    const bool zero = zero_output_layer && l + 1 == weights_.size();
    for (double& x : w) x = zero ? 0.0 : rng.uniform(-bound, bound);
    for (double& x : b) x = 0.0;
  }
}

}  // namespace flowhiql
