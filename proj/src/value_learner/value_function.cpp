#include "flowhiql/value_learner/value_function.hpp"

#include "flowhiql/errors.hpp"

namespace flowhiql {

double expectile_loss(double diff, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ArgumentError("expectile tau must lie in (0, 1)");
  const double w = diff < 0.0 ? 1.0 - tau : tau;
  return w * diff * diff;
}

double td_target(double reward, double gamma, double v_next_target, bool terminal) {
  return terminal ? reward : reward + gamma * v_next_target;
}

ValueFunction::ValueFunction(std::size_t state_dim, const std::vector<std::size_t>& hidden,
                             Random& init_rng)
    : state_dim_(state_dim) {
  if (state_dim == 0) throw ConfigError("value function needs a nonzero state dimension");
  std::vector<std::size_t> sizes{2 * state_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  net_ = Mlp(online_, "value", sizes);
  net_.initialize(online_, init_rng, false);
  target_ = online_;
}

namespace {

Matrix join(const Matrix& s, const Matrix& g, std::size_t dim) {
  if (static_cast<std::size_t>(s.cols()) != dim || static_cast<std::size_t>(g.cols()) != dim ||
      s.rows() != g.rows()) {
    throw ConfigError("value function inputs have mismatched dimensions");
  }
  Matrix in(s.rows(), s.cols() + g.cols());
  in << s, g;
  return in;
}

}  // namespace

Eigen::VectorXd ValueFunction::value(const Matrix& s, const Matrix& g, bool use_target) const {
  return net_.forward(use_target ? target_ : online_, join(s, g, state_dim_)).col(0);
}

double ValueFunction::value(std::span<const double> s, std::span<const double> g,
                            bool use_target) const {
  Matrix sm = Eigen::Map<const Matrix>(s.data(), 1, static_cast<Eigen::Index>(s.size()));
  Matrix gm = Eigen::Map<const Matrix>(g.data(), 1, static_cast<Eigen::Index>(g.size()));
  return value(sm, gm, use_target)(0);
}

Tape::Var ValueFunction::value_node(Tape& tape, const Matrix& s, const Matrix& g) const {
  return net_.forward(tape, online_, tape.constant(join(s, g, state_dim_)));
}

ValueAndGrad value_loss_and_grad(const ValueFunction& vf, const ValueBatch& batch,
                                 const ValueUpdateOptions& options) {
  const auto n = batch.s.rows();
  if (n == 0) throw ArgumentError("value update on an empty batch");
  if (!(options.tau > 0.0 && options.tau < 1.0)) throw ArgumentError("tau must lie in (0, 1)");
  const Eigen::VectorXd v_next = vf.value(batch.s_next, batch.g, true);
  Matrix y(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    y(i, 0) = td_target(batch.reward[k], options.gamma, v_next(i), batch.terminal[k] != 0);
  }
  return value_and_grad(
      [&](Tape& tape) {
        Tape::Var v = vf.value_node(tape, batch.s, batch.g);
        Tape::Var diff = tape.sub(tape.constant(y), v);
        // The expectile weight is piecewise constant in the residual, so it
        // enters the graph as a constant.
        const Matrix& d = tape.value(diff);
        Matrix w(n, 1);
        for (Eigen::Index i = 0; i < n; ++i) {
          w(i, 0) = d(i, 0) < 0.0 ? 1.0 - options.tau : options.tau;
        }
        return tape.mean(tape.mul(tape.constant(std::move(w)), tape.square(diff)));
      },
      vf.online());
}

double value_update(ValueFunction& vf, AdamState& adam, const ValueBatch& batch,
                    const ValueUpdateOptions& options) {
  ValueAndGrad vg = value_loss_and_grad(vf, batch, options);
  clip_grad_norm(vg.grad, options.grad_clip);
  adam_step(adam, vf.online(), vg.grad);
  polyak_update(vf.target(), vf.online(), options.polyak);
  return vg.value;
}

}  // namespace flowhiql
