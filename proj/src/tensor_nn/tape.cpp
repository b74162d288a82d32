#include "flowhiql/tensor_nn/tape.hpp"

#include <cmath>

#include "flowhiql/errors.hpp"

namespace flowhiql {

namespace {

const std::string kInputLabel = "input";

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ConfigError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                      std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                      std::to_string(b.cols()));
  }
}

}  // namespace

// 1 - 2 / (e^{2x} + 1) saturates cleanly to +-1 and is several times faster
// than the scalar tanh. Absolute error stays near machine epsilon.
Matrix tanh_values(const Matrix& x) {
  return 1.0 - 2.0 / ((2.0 * x.array()).exp() + 1.0);
}

Tape::Var Tape::push(Matrix value, std::initializer_list<Var> parents, const char* op,
                     std::function<void(Tape&, std::size_t)> backprop) {
  Node node;
  bool needs_grad = false;
  for (Var p : parents) {
    const Node& parent = nodes_[p.id];
    needs_grad = needs_grad || parent.needs_grad;
    if (!node.label && parent.label) node.label = parent.label;
  }
  if (!value.allFinite()) {
    throw NumericError(node.label ? *node.label : kInputLabel,
                       std::string("non-finite value produced by ") + op);
  }
  node.value = std::move(value);
  node.needs_grad = needs_grad;
  if (needs_grad) node.backprop = std::move(backprop);
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

Matrix& Tape::grad_of(std::size_t id) { return nodes_[id].grad; }

template <typename Expr>
void Tape::accumulate(std::size_t id, const Expr& g) {
  Node& n = nodes_[id];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

Tape::Var Tape::constant(Matrix value) {
  if (!value.allFinite()) throw NumericError(kInputLabel, "non-finite constant");
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

Tape::Var Tape::param(const ParamStore& store, std::size_t segment) {
  const Segment& seg = store.segment(segment);
  Eigen::Index rows = 1;
  Eigen::Index cols = 0;
  if (seg.shape.size() == 1) {
    cols = static_cast<Eigen::Index>(seg.shape[0]);
  } else if (seg.shape.size() == 2) {
    rows = static_cast<Eigen::Index>(seg.shape[0]);
    cols = static_cast<Eigen::Index>(seg.shape[1]);
  } else {
    throw ConfigError("segment '" + seg.name + "' is not a vector or matrix");
  }
  Node node;
  node.value = Eigen::Map<const Matrix>(store.values(segment).data(), rows, cols);
  node.label = &seg.name;
  if (!node.value.allFinite()) throw NumericError(seg.name, "non-finite parameter");
  if (wrt_ == &store) {
    node.needs_grad = true;
    node.param_offset = static_cast<long>(seg.offset);
  }
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

double Tape::scalar(Var v) const {
  const Matrix& m = nodes_[v.id].value;
  if (m.size() != 1) throw ConfigError("scalar(): node is not 1x1");
  return m(0, 0);
}

Tape::Var Tape::matmul(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  if (A.cols() != B.rows()) throw ConfigError("matmul: inner dimension mismatch");
  Matrix out = A * B;
  return push(std::move(out), {a, b}, "matmul", [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    t.accumulate(a.id, g * t.value(b).transpose());
    t.accumulate(b.id, t.value(a).transpose() * g);
  });
}

Tape::Var Tape::affine(Var x, Var w, Var b) {
  const Matrix& X = value(x);
  const Matrix& W = value(w);
  const Matrix& B = value(b);
  if (X.cols() != W.rows()) {
    throw ConfigError("affine: input has " + std::to_string(X.cols()) + " columns, weight expects " +
                      std::to_string(W.rows()));
  }
  if (B.rows() != 1 || B.cols() != W.cols()) throw ConfigError("affine: bias shape mismatch");
  Matrix out = X * W;
  out.rowwise() += B.row(0);
  // Weight first so numeric errors are labelled with the layer.
  return push(std::move(out), {w, x, b}, "affine", [x, w, b](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    t.accumulate(x.id, g * t.value(w).transpose());
    t.accumulate(w.id, t.value(x).transpose() * g);
    t.accumulate(b.id, g.colwise().sum());
  });
}

Tape::Var Tape::add(Var a, Var b) {
  require_same_shape(value(a), value(b), "add");
  Matrix out = value(a) + value(b);
  return push(std::move(out), {a, b}, "add", [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    t.accumulate(a.id, g);
    t.accumulate(b.id, g);
  });
}

Tape::Var Tape::sub(Var a, Var b) {
  require_same_shape(value(a), value(b), "sub");
  Matrix out = value(a) - value(b);
  return push(std::move(out), {a, b}, "sub", [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    t.accumulate(a.id, g);
    t.accumulate(b.id, -g);
  });
}

Tape::Var Tape::mul(Var a, Var b) {
  require_same_shape(value(a), value(b), "mul");
  Matrix out = value(a).cwiseProduct(value(b));
  return push(std::move(out), {a, b}, "mul", [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    t.accumulate(a.id, g.cwiseProduct(t.value(b)));
    t.accumulate(b.id, g.cwiseProduct(t.value(a)));
  });
}

Tape::Var Tape::scale(Var a, double c) {
  Matrix out = value(a) * c;
  return push(std::move(out), {a}, "scale", [a, c](Tape& t, std::size_t self) {
    t.accumulate(a.id, t.nodes_[self].grad * c);
  });
}

Tape::Var Tape::add_scalar(Var a, double c) {
  Matrix out = value(a).array() + c;
  return push(std::move(out), {a}, "add_scalar", [a](Tape& t, std::size_t self) {
    t.accumulate(a.id, t.nodes_[self].grad);
  });
}

Tape::Var Tape::tanh(Var a) {
  Matrix out = tanh_values(value(a));
  return push(std::move(out), {a}, "tanh", [a](Tape& t, std::size_t self) {
    const Node& n = t.nodes_[self];
    t.accumulate(a.id, (n.grad.array() * (1.0 - n.value.array().square())).matrix());
  });
}

Tape::Var Tape::scaled_tanh(Var a, double c) {
  Matrix out = c * tanh_values(value(a)).array();
  return push(std::move(out), {a}, "scaled_tanh", [a, c](Tape& t, std::size_t self) {
    const Node& n = t.nodes_[self];
    t.accumulate(a.id, (n.grad.array() * (c - n.value.array().square() / c)).matrix());
  });
}

Tape::Var Tape::exp(Var a) {
  Matrix out = value(a).array().exp();
  return push(std::move(out), {a}, "exp", [a](Tape& t, std::size_t self) {
    const Node& n = t.nodes_[self];
    t.accumulate(a.id, n.grad.cwiseProduct(n.value));
  });
}

Tape::Var Tape::log(Var a) {
  Matrix out = value(a).array().log();
  return push(std::move(out), {a}, "log", [a](Tape& t, std::size_t self) {
    const Node& n = t.nodes_[self];
    t.accumulate(a.id, (n.grad.array() / t.value(a).array()).matrix());
  });
}

Tape::Var Tape::square(Var a) {
  Matrix out = value(a).array().square();
  return push(std::move(out), {a}, "square", [a](Tape& t, std::size_t self) {
    const Node& n = t.nodes_[self];
    t.accumulate(a.id, 2.0 * n.grad.cwiseProduct(t.value(a)));
  });
}

Tape::Var Tape::sum(Var a) {
  Matrix out(1, 1);
  out(0, 0) = value(a).sum();
  return push(std::move(out), {a}, "sum", [a](Tape& t, std::size_t self) {
    const double g = t.nodes_[self].grad(0, 0);
    const Matrix& av = t.value(a);
    t.accumulate(a.id, Matrix::Constant(av.rows(), av.cols(), g));
  });
}

Tape::Var Tape::mean(Var a) {
  const auto n = static_cast<double>(value(a).size());
  if (n == 0) throw ConfigError("mean of empty matrix");
  return scale(sum(a), 1.0 / n);
}

Tape::Var Tape::row_sum(Var a) {
  Matrix out = value(a).rowwise().sum();
  return push(std::move(out), {a}, "row_sum", [a](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    t.accumulate(a.id, g.replicate(1, t.value(a).cols()));
  });
}

Tape::Var Tape::concat_cols(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  if (A.rows() != B.rows()) throw ConfigError("concat_cols: row count mismatch");
  Matrix out(A.rows(), A.cols() + B.cols());
  out.leftCols(A.cols()) = A;
  out.rightCols(B.cols()) = B;
  const auto ca = A.cols();
  const auto cb = B.cols();
  return push(std::move(out), {a, b}, "concat_cols", [a, b, ca, cb](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    t.accumulate(a.id, g.leftCols(ca));
    t.accumulate(b.id, g.rightCols(cb));
  });
}

Tape::Var Tape::cols(Var a, std::span<const std::size_t> index) {
  const Matrix& A = value(a);
  Matrix out(A.rows(), static_cast<Eigen::Index>(index.size()));
  for (std::size_t j = 0; j < index.size(); ++j) {
    if (index[j] >= static_cast<std::size_t>(A.cols())) throw ConfigError("cols: index out of range");
    out.col(static_cast<Eigen::Index>(j)) = A.col(static_cast<Eigen::Index>(index[j]));
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  return push(std::move(out), {a}, "cols", [a, idx = std::move(idx)](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    const Matrix& av = t.value(a);
    Matrix full = Matrix::Zero(av.rows(), av.cols());
    for (std::size_t j = 0; j < idx.size(); ++j) {
      full.col(static_cast<Eigen::Index>(idx[j])) += g.col(static_cast<Eigen::Index>(j));
    }
    t.accumulate(a.id, full);
  });
}

Tape::Var Tape::scatter_cols(Var a, std::span<const std::size_t> idx_a, Var b,
                             std::span<const std::size_t> idx_b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  if (A.rows() != B.rows()) throw ConfigError("scatter_cols: row count mismatch");
  if (static_cast<std::size_t>(A.cols()) != idx_a.size() ||
      static_cast<std::size_t>(B.cols()) != idx_b.size()) {
    throw ConfigError("scatter_cols: index count mismatch");
  }
  const auto total = static_cast<Eigen::Index>(idx_a.size() + idx_b.size());
  Matrix out(A.rows(), total);
  for (std::size_t j = 0; j < idx_a.size(); ++j) {
    out.col(static_cast<Eigen::Index>(idx_a[j])) = A.col(static_cast<Eigen::Index>(j));
  }
  for (std::size_t j = 0; j < idx_b.size(); ++j) {
    out.col(static_cast<Eigen::Index>(idx_b[j])) = B.col(static_cast<Eigen::Index>(j));
  }
  std::vector<std::size_t> ia(idx_a.begin(), idx_a.end());
  std::vector<std::size_t> ib(idx_b.begin(), idx_b.end());
  return push(std::move(out), {a, b}, "scatter_cols",
              [a, b, ia = std::move(ia), ib = std::move(ib)](Tape& t, std::size_t self) {
                const Matrix& g = t.nodes_[self].grad;
                Matrix ga(g.rows(), static_cast<Eigen::Index>(ia.size()));
                for (std::size_t j = 0; j < ia.size(); ++j) {
                  ga.col(static_cast<Eigen::Index>(j)) = g.col(static_cast<Eigen::Index>(ia[j]));
                }
                Matrix gb(g.rows(), static_cast<Eigen::Index>(ib.size()));
                for (std::size_t j = 0; j < ib.size(); ++j) {
                  gb.col(static_cast<Eigen::Index>(j)) = g.col(static_cast<Eigen::Index>(ib[j]));
                }
                t.accumulate(a.id, ga);
                t.accumulate(b.id, gb);
              });
}

std::vector<double> Tape::backward(Var loss) {
  if (!wrt_) throw ConfigError("backward() on a non-recording tape");
  if (value(loss).size() != 1) throw ConfigError("backward(): loss is not a scalar");
  std::vector<double> grad(wrt_->size(), 0.0);
  if (!nodes_[loss.id].needs_grad) return grad;
  nodes_[loss.id].grad = Matrix::Ones(1, 1);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    if (n.param_offset >= 0) {
      const auto count = static_cast<std::size_t>(n.grad.size());
      const double* g = n.grad.data();
      for (std::size_t k = 0; k < count; ++k) grad[static_cast<std::size_t>(n.param_offset) + k] += g[k];
    } else if (n.backprop) {
      n.backprop(*this, i);
    }
  }
  for (std::size_t k = 0; k < grad.size(); ++k) {
    if (!std::isfinite(grad[k])) {
      throw NumericError(wrt_->segment_at(k).name, "non-finite gradient");
    }
  }
  return grad;
}

ValueAndGrad value_and_grad(const std::function<Tape::Var(Tape&)>& loss,
                            const ParamStore& params) {
  Tape tape(params);
  Tape::Var l = loss(tape);
  ValueAndGrad out;
  out.value = tape.scalar(l);
  out.grad = tape.backward(l);
  return out;
}

}  // namespace flowhiql
