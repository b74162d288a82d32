#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "flowhiql/tensor_nn/param_store.hpp"

namespace flowhiql {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Elementwise tanh through the vectorized exponential.
Matrix tanh_values(const Matrix& x);

/// Reverse-mode autodiff tape over dense row-major matrices.
///
/// A default-constructed tape only evaluates. A tape constructed with a
/// ParamStore records the graph and differentiates with respect to that store
/// (matched by identity); parameters read from any other store are constants.
/// Every node value is checked for finiteness as it is produced, and a
/// NumericError names the parameter segment the value descends from.
class Tape {
 public:
  struct Var {
    std::size_t id = 0;
  };

  Tape() = default;
  explicit Tape(const ParamStore& wrt) : wrt_(&wrt) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return wrt_ != nullptr; }

  Var constant(Matrix value);
  /// Shape [r, c] reads as an r x c matrix; shape [c] as a 1 x c row.
  Var param(const ParamStore& store, std::size_t segment);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  double scalar(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  Var matmul(Var a, Var b);
  /// x * w + b with b broadcast across rows.
  Var affine(Var x, Var w, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double c);
  Var add_scalar(Var a, double c);
  Var tanh(Var a);
  /// c * tanh(a), fused.
  Var scaled_tanh(Var a, double c);
  Var exp(Var a);
  Var log(Var a);
  Var square(Var a);
  Var sum(Var a);
  Var mean(Var a);
  Var row_sum(Var a);
  Var concat_cols(Var a, Var b);
  Var cols(Var a, std::span<const std::size_t> index);
  /// Builds a matrix whose columns idx_a come from a and idx_b from b.
  Var scatter_cols(Var a, std::span<const std::size_t> idx_a, Var b,
                   std::span<const std::size_t> idx_b);

  /// Gradient of scalar `loss` with respect to the store given at
  /// construction, as a flat array aligned with ParamStore::flat().
  std::vector<double> backward(Var loss);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    const std::string* label = nullptr;
    long param_offset = -1;
    std::function<void(Tape&, std::size_t)> backprop;
  };

  Var push(Matrix value, std::initializer_list<Var> parents, const char* op,
           std::function<void(Tape&, std::size_t)> backprop);
  Matrix& grad_of(std::size_t id);
  template <typename Expr>
  void accumulate(std::size_t id, const Expr& g);

  const ParamStore* wrt_ = nullptr;
  std::vector<Node> nodes_;
};

struct ValueAndGrad {
  double value = 0.0;
  std::vector<double> grad;
};

/// Evaluates `loss` on a recording tape and returns its value together with
/// the gradient with respect to `params`.
ValueAndGrad value_and_grad(const std::function<Tape::Var(Tape&)>& loss,
                            const ParamStore& params);

}  // namespace flowhiql
