#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "flowhiql/random.hpp"
#include "flowhiql/tensor_nn/param_store.hpp"
#include "flowhiql/tensor_nn/tape.hpp"

namespace flowhiql {

enum class OutputActivation { kIdentity, kScaledTanh };

/// Dense feed-forward network with tanh hidden layers.
///
/// The network registers its weights in a ParamStore at construction and
/// afterwards only holds segment indices; it can evaluate any store with the
/// same layout (online and target copies share one Mlp).
class Mlp {
 public:
  Mlp() = default;
  Mlp(ParamStore& store, const std::string& prefix, std::vector<std::size_t> sizes,
      OutputActivation output = OutputActivation::kIdentity, double output_scale = 1.0);

  Tape::Var forward(Tape& tape, const ParamStore& params, Tape::Var input) const;
  Matrix forward(const ParamStore& params, const Matrix& input) const;
  std::vector<double> forward(const ParamStore& params, std::span<const double> input) const;

  /// Uniform fan-in initialization with variance 1/fan_in; biases zero. With
  /// `zero_output_layer` the final weights are zeroed too, so the network
  /// outputs exactly zero until trained.
  void initialize(ParamStore& params, Random& rng, bool zero_output_layer) const;

  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t layer_count() const { return weights_.size(); }
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  OutputActivation output_activation() const { return output_; }
  double output_scale() const { return output_scale_; }
  std::size_t weight_segment(std::size_t layer) const { return weights_.at(layer); }
  std::size_t bias_segment(std::size_t layer) const { return biases_.at(layer); }

 private:
  void check_layout(const ParamStore& params) const;

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> weights_;
  std::vector<std::size_t> biases_;
  std::vector<std::string> names_;
  OutputActivation output_ = OutputActivation::kIdentity;
  double output_scale_ = 1.0;
};

}  // namespace flowhiql
