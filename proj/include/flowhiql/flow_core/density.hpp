#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "flowhiql/random.hpp"
#include "flowhiql/tensor_nn/param_store.hpp"
#include "flowhiql/tensor_nn/tape.hpp"

namespace flowhiql {

struct DensitySample {
  std::vector<double> x;
  double log_prob = 0.0;
};

/// Conditional density p(x | context) with exact likelihood and a
/// reparameterized sampler x = T(u; context), u ~ N(0, I).
///
/// Implementations describe a parameter layout; the parameters themselves
/// live in a caller-owned ParamStore passed to every call.
class ConditionalDensity {
 public:
  virtual ~ConditionalDensity() = default;

  virtual std::size_t dim() const = 0;
  virtual std::size_t context_dim() const = 0;
  virtual std::string family() const = 0;
  virtual void initialize(ParamStore& params, Random& rng) const = 0;

  /// Per-row log p(x | context) as an n x 1 node.
  virtual Tape::Var log_prob_node(Tape& tape, const ParamStore& params, Tape::Var x,
                                  Tape::Var context) const = 0;

  /// Maps base noise rows to samples; optionally returns log p of each sample.
  virtual Matrix push_forward(const ParamStore& params, const Matrix& noise,
                              const Matrix& context, Matrix* log_prob) const = 0;

  Matrix log_prob(const ParamStore& params, const Matrix& x, const Matrix& context) const;
  double log_prob(const ParamStore& params, std::span<const double> x,
                  std::span<const double> context) const;

  DensitySample sample(const ParamStore& params, std::span<const double> context,
                       Random& rng) const;
  /// One sample per context row with base noise scaled by `noise_scale`
  /// (0 gives the deterministic image of u = 0).
  Matrix sample_batch(const ParamStore& params, const Matrix& context, Random& rng,
                      double noise_scale = 1.0) const;

 protected:
  void check_inputs(const Matrix& x, const Matrix& context) const;
};

/// log N(u; 0, I) for each row.
Eigen::VectorXd standard_normal_log_density(const Matrix& u);

/// Rows processed per evaluation chunk for large batches.
inline constexpr Eigen::Index kEvalChunkRows = 4096;

}  // namespace flowhiql
