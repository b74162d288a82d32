#pragma once

// Builders shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "flowhiql/envs_data/chain_env.hpp"
#include "flowhiql/envs_data/dataset.hpp"
#include "flowhiql/flow_core/coupling_flow.hpp"
#include "flowhiql/random.hpp"
#include "flowhiql/tensor_nn/param_store.hpp"

namespace fixture {

using flowhiql::ConditionalFlow;
using flowhiql::Matrix;
using flowhiql::ParamStore;
using flowhiql::Random;

inline Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, Random& rng, double sd = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = sd * rng.normal();
  return m;
}

inline Matrix row(const std::vector<double>& v) {
  Matrix m(1, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = v[i];
  return m;
}

inline std::vector<double> to_vector(const Matrix& m) {
  return std::vector<double>(m.data(), m.data() + m.size());
}

/// Non-identity flow: every subnetwork gets random weights, with the output
/// layers scaled by `out_scale` so the map stays well conditioned.
inline void randomize_flow(const ConditionalFlow& flow, ParamStore& params, Random& rng,
                           double out_scale = 0.3) {
  for (const auto& layer : flow.layers()) {
    for (const auto* net : {&layer.scale_net, &layer.shift_net}) {
      net->initialize(params, rng, false);
      const std::size_t last = net->layer_count() - 1;
      for (auto& w : params.values(net->weight_segment(last))) w *= out_scale;
      for (auto& b : params.values(net->bias_segment(last))) b = out_scale * rng.uniform(-1.0, 1.0);
    }
  }
}

inline flowhiql::FlowConfig small_flow_config(std::size_t dim, std::size_t context_dim,
                                              std::size_t layers = 4) {
  flowhiql::FlowConfig c;
  c.dim = dim;
  c.context_dim = context_dim;
  c.num_layers = layers;
  c.hidden = {16, 16};
  return c;
}

struct FlowFixture {
  ParamStore params;
  std::unique_ptr<ConditionalFlow> flow;
};

/// Identity flow at initialization, or a randomized one.
inline FlowFixture make_flow(flowhiql::FlowConfig config, std::uint64_t seed, bool random) {
  FlowFixture b;
  b.flow = std::make_unique<ConditionalFlow>(b.params, "f", std::move(config));
  Random rng(seed);
  b.flow->initialize(b.params, rng);
  if (random) randomize_flow(*b.flow, b.params, rng);
  return b;
}

/// Chain trajectories that walk monotonically from a random cell to one end
/// with full-strength moves; `lateral` scales random nudges of y (0 keeps
/// y = 0 throughout). Every relabeled goal
/// lies ahead on a shortest path, so the on-dataset TD fixed point is the
/// optimal value.
inline flowhiql::OfflineDataset sweep_dataset(const flowhiql::ChainEnv& env, std::size_t n_traj,
                                              std::uint64_t seed, double lateral = 0.0) {
  flowhiql::OfflineDataset ds;
  ds.env = env.descriptor();
  ds.state_dim = 2;
  ds.action_dim = 2;
  ds.seed = seed;
  const std::size_t n = env.cells();
  for (std::size_t k = 0; k < n_traj; ++k) {
    Random rng(seed, k + 1);
    std::size_t cell = rng.index(n);
    int dir = rng.uniform() < 0.5 ? -1 : 1;
    if (cell == 0) dir = 1;
    if (cell == n - 1) dir = -1;
    const std::size_t steps = dir > 0 ? n - 1 - cell : cell;
    flowhiql::Trajectory tr;
    tr.states.resize(static_cast<Eigen::Index>(steps + 1), 2);
    tr.actions.resize(static_cast<Eigen::Index>(steps), 2);
    std::vector<double> s{env.cell_x(cell), lateral * rng.uniform(-1.0, 1.0)};
    tr.states.row(0) << s[0], s[1];
    for (std::size_t t = 0; t < steps; ++t) {
      const std::vector<double> a{static_cast<double>(dir), lateral * rng.uniform(-1.0, 1.0)};
      s = env.transition(s, a);
      tr.actions.row(static_cast<Eigen::Index>(t)) << a[0], a[1];
      tr.states.row(static_cast<Eigen::Index>(t + 1)) << s[0], s[1];
    }
    ds.trajectories.push_back(std::move(tr));
  }
  return ds;
}

}  // namespace fixture
