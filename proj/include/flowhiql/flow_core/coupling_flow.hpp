#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "flowhiql/flow_core/density.hpp"
#include "flowhiql/tensor_nn/mlp.hpp"

namespace flowhiql {

struct FlowConfig {
  std::size_t dim = 2;
  std::size_t context_dim = 0;
  std::size_t num_layers = 4;
  std::vector<std::size_t> hidden{64, 64};
  double scale_clamp = 3.0;      // S_max: |s(.)| <= scale_clamp elementwise
  double translate_clamp = 5.0;  // T_elem: |t(.)_j| <= translate_clamp elementwise
  bool clamped = true;           // false only for test fixtures
};

/// Affine coupling layer. Coordinates with mask == true pass through and,
/// together with the context, condition the scale and shift applied to the
/// remaining coordinates.
struct CouplingLayer {
  std::vector<bool> mask;
  std::vector<std::size_t> pass;
  std::vector<std::size_t> transformed;
  Mlp scale_net;
  Mlp shift_net;
};

struct FlowResult {
  Matrix value;
  Eigen::VectorXd log_det;
};

struct EntropyEstimate {
  double estimate = 0.0;
  double std_err = 0.0;
};

/// Conditional RealNVP: a stack of affine couplings over a standard normal
/// base. forward maps base noise u to x; inverse maps x back to u.
class ConditionalFlow : public ConditionalDensity {
 public:
  ConditionalFlow(ParamStore& store, const std::string& prefix, FlowConfig config);

  std::size_t dim() const override { return config_.dim; }
  std::size_t context_dim() const override { return config_.context_dim; }
  std::string family() const override { return "flow"; }
  void initialize(ParamStore& params, Random& rng) const override;

  Tape::Var log_prob_node(Tape& tape, const ParamStore& params, Tape::Var x,
                          Tape::Var context) const override;
  Matrix push_forward(const ParamStore& params, const Matrix& noise, const Matrix& context,
                      Matrix* log_prob) const override;

  /// x = f(u; context) with log|det df/du| per row.
  FlowResult forward(const ParamStore& params, const Matrix& u, const Matrix& context) const;
  /// u = f^{-1}(x; context) with log|det df^{-1}/dx| per row.
  FlowResult inverse(const ParamStore& params, const Matrix& x, const Matrix& context) const;
  /// Applies coupling layer `index` alone in the forward direction.
  FlowResult forward_layer(std::size_t index, const ParamStore& params, const Matrix& u,
                           const Matrix& context) const;

  /// Tape-level inverse; `log_det` receives the n x 1 log-determinant node.
  Tape::Var inverse_node(Tape& tape, const ParamStore& params, Tape::Var x, Tape::Var context,
                         Tape::Var* log_det) const;

  /// Monte-Carlo entropy -E_u[log N(u) - log|det df/du|] from n base draws.
  EntropyEstimate entropy_mc(const ParamStore& params, std::span<const double> context,
                             std::size_t n, Random& rng) const;

  const FlowConfig& config() const { return config_; }
  const std::vector<CouplingLayer>& layers() const { return layers_; }

 private:
  Tape::Var couple(Tape& tape, const ParamStore& params, const CouplingLayer& layer,
                   Tape::Var in, Tape::Var context, bool inverse, Tape::Var* log_det) const;
  FlowResult run(const ParamStore& params, const Matrix& in, const Matrix& context,
                 bool inverse, std::size_t first, std::size_t last) const;

  FlowConfig config_;
  std::vector<CouplingLayer> layers_;
};

}  // namespace flowhiql
