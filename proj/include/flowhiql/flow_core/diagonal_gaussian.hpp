#pragma once

#include <string>
#include <vector>

#include "flowhiql/flow_core/density.hpp"
#include "flowhiql/tensor_nn/mlp.hpp"

namespace flowhiql {

/// Context-conditioned diagonal Gaussian, x = mean(c) + exp(log_std(c)) * u.
/// Used as the unimodal ablation of the flow policies; the log-std head is
/// clamped to [-log_std_clamp, log_std_clamp].
class DiagonalGaussian : public ConditionalDensity {
 public:
  DiagonalGaussian(ParamStore& store, const std::string& prefix, std::size_t dim,
                   std::size_t context_dim, std::vector<std::size_t> hidden,
                   double log_std_clamp);

  std::size_t dim() const override { return dim_; }
  std::size_t context_dim() const override { return context_dim_; }
  std::string family() const override { return "gaussian"; }
  void initialize(ParamStore& params, Random& rng) const override;

  Tape::Var log_prob_node(Tape& tape, const ParamStore& params, Tape::Var x,
                          Tape::Var context) const override;
  Matrix push_forward(const ParamStore& params, const Matrix& noise, const Matrix& context,
                      Matrix* log_prob) const override;

 private:
  std::size_t dim_;
  std::size_t context_dim_;
  Mlp mean_net_;
  Mlp log_std_net_;
};

}  // namespace flowhiql
