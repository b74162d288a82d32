#include "flowhiql/hier_policy/trainer.hpp"

#include "flowhiql/errors.hpp"
#include "flowhiql/hier_policy/agent.hpp"

namespace flowhiql {

namespace {

constexpr std::uint64_t kInitStream = std::uint64_t{1} << 62;
constexpr std::uint64_t kEvalStream = std::uint64_t{1} << 61;

void pack(ParamStore& out, const std::string& prefix, const ParamStore& in) {
  for (std::size_t i = 0; i < in.segment_count(); ++i) {
    const auto& seg = in.segment(i);
    const auto j = out.add_segment(prefix + "." + seg.name, seg.shape);
    const auto src = in.values(i);
    std::copy(src.begin(), src.end(), out.values(j).begin());
  }
}

void pack_vector(ParamStore& out, const std::string& name, std::span<const double> values) {
  const auto j = out.add_segment(name, {values.size()});
  std::copy(values.begin(), values.end(), out.values(j).begin());
}

std::span<const double> find_segment(const ParamStore& in, const std::string& name,
                                     std::size_t size) {
  const auto idx = in.find(name);
  if (!idx) throw ConfigError("checkpoint has no segment '" + name + "'");
  const auto v = in.values(*idx);
  if (v.size() != size) throw ConfigError("checkpoint segment '" + name + "' has the wrong size");
  return v;
}

void unpack(ParamStore& out, const std::string& prefix, const ParamStore& in) {
  for (std::size_t i = 0; i < out.segment_count(); ++i) {
    const auto& seg = out.segment(i);
    const auto src = find_segment(in, prefix + "." + seg.name, seg.size);
    std::copy(src.begin(), src.end(), out.values(i).begin());
  }
}

void pack_adam(ParamStore& out, const std::string& name, const AdamState& adam) {
  pack_vector(out, "adam." + name + ".m", adam.m);
  pack_vector(out, "adam." + name + ".v", adam.v);
  const double step = static_cast<double>(adam.step);
  pack_vector(out, "adam." + name + ".step", std::span<const double>(&step, 1));
}

void unpack_adam(AdamState& adam, const std::string& name, const ParamStore& in) {
  const auto m = find_segment(in, "adam." + name + ".m", adam.m.size());
  const auto v = find_segment(in, "adam." + name + ".v", adam.v.size());
  adam.m.assign(m.begin(), m.end());
  adam.v.assign(v.begin(), v.end());
  adam.step = static_cast<std::uint64_t>(find_segment(in, "adam." + name + ".step", 1)[0]);
}

template <typename F>
auto with_context(const std::string& where, std::size_t step, F&& f) {
  const std::string ctx = "step " + std::to_string(step) + ", " + where + ": ";
  try {
    return f();
  } catch (const NumericError& e) {
    throw NumericError(e.segment(), ctx + e.what());
  }
}

}  // namespace

std::uint64_t eval_stream(std::size_t step) { return kEvalStream + step; }

Trainer::Trainer(const TrainConfig& config, const OfflineDataset& dataset, const GoalEnv& env)
    : config_((config.validate(), config)),
      env_(env),
      sampler_(dataset, env, config.relabel()),
      init_rng_(config.seed, kInitStream),
      vf_(env.state_dim(), config.value_hidden, init_rng_),
      high_(config.family, "high", env.state_dim(), 2 * env.state_dim(), config, init_rng_),
      low_(config.family, "low", env.action_dim(), 2 * env.state_dim(), config, init_rng_),
      adam_v_(AdamState::for_params(vf_.online(), config.lr_value)),
      adam_h_(AdamState::for_params(high_.params(), config.lr_high)),
      adam_l_(AdamState::for_params(low_.params(), config.lr_low)) {
  if (dataset.env != env.descriptor()) {
    throw ConfigError("dataset was generated for '" + dataset.env + "', config uses '" +
                      env.descriptor() + "'");
  }
}

IterationLosses Trainer::iteration() {
  Random rng(config_.seed, step_ + 1);
  const ValueBatch vb = sampler_.value_batch(rng, config_.batch_size);
  const HighBatch hb = sampler_.high_batch(rng, config_.batch_size, config_.k);
  const LowBatch lb = sampler_.low_batch(rng, config_.batch_size, config_.k);

  const ValueUpdateOptions vo{config_.tau, config_.gamma, config_.polyak, config_.grad_clip};
  const PolicyUpdateOptions po{config_.beta, config_.w_max, config_.grad_clip};
  IterationLosses out;
  out.value = with_context("value update", step_, [&] { return value_update(vf_, adam_v_, vb, vo); });
  out.high = with_context("high-level update", step_,
                          [&] { return high_policy_update(high_, adam_h_, vf_, hb, po); });
  out.low = with_context("low-level update", step_,
                         [&] { return low_policy_update(low_, adam_l_, vf_, lb, po); });
  ++step_;
  sum_v_ += out.value;
  sum_h_ += out.high;
  sum_l_ += out.low;
  ++pending_;
  return out;
}

EvalResult Trainer::evaluate_policies(Random& rng) const {
  HierarchicalAgent agent(high_, low_, config_.k, config_.eval_high_noise, config_.eval_low_noise);
  return evaluate(agent, env_, env_.eval_goals(config_.eval_goals), config_.eval_episodes, rng);
}

std::vector<MetricsRow> Trainer::run(const std::function<void(const MetricsRow&)>& on_row,
                                     const std::function<void(std::size_t)>& on_checkpoint) {
  std::vector<MetricsRow> rows;
  const std::size_t ckpt = config_.effective_checkpoint_interval();
  while (step_ < config_.steps) {
    iteration();
    const bool last = step_ == config_.steps;
    if (step_ % config_.eval_interval == 0 || last) {
      Random eval_rng(config_.seed, eval_stream(step_));
      const double n = static_cast<double>(pending_);
      MetricsRow row{step_, sum_v_ / n, sum_h_ / n, sum_l_ / n,
                     evaluate_policies(eval_rng).success_rate};
      sum_v_ = sum_h_ = sum_l_ = 0.0;
      pending_ = 0;
      rows.push_back(row);
      if (on_row) on_row(row);
    }
    if ((step_ % ckpt == 0 || last) && on_checkpoint) on_checkpoint(step_);
  }
  return rows;
}

ParamStore Trainer::snapshot() const {
  ParamStore out;
  pack(out, "value", vf_.online());
  pack(out, "target", vf_.target());
  pack(out, "high", high_.params());
  pack(out, "low", low_.params());
  pack_adam(out, "value", adam_v_);
  pack_adam(out, "high", adam_h_);
  pack_adam(out, "low", adam_l_);
  const double state[5] = {static_cast<double>(step_), sum_v_, sum_h_, sum_l_,
                           static_cast<double>(pending_)};
  pack_vector(out, "train.state", state);
  out.set_version(step_);
  return out;
}

void Trainer::restore(const ParamStore& snapshot) {
  unpack(vf_.online(), "value", snapshot);
  unpack(vf_.target(), "target", snapshot);
  unpack(high_.params(), "high", snapshot);
  unpack(low_.params(), "low", snapshot);
  unpack_adam(adam_v_, "value", snapshot);
  unpack_adam(adam_h_, "high", snapshot);
  unpack_adam(adam_l_, "low", snapshot);
  const auto state = find_segment(snapshot, "train.state", 5);
  step_ = static_cast<std::size_t>(state[0]);
  sum_v_ = state[1];
  sum_h_ = state[2];
  sum_l_ = state[3];
  pending_ = static_cast<std::size_t>(state[4]);
}

std::vector<MetricsRow> train(const TrainConfig& config, const OfflineDataset& dataset,
                              const GoalEnv& env) {
  Trainer trainer(config, dataset, env);
  return trainer.run();
}

PolicyPair load_policies(const TrainConfig& config, const GoalEnv& env, const ParamStore& snapshot) {
  config.validate();
  Random init(config.seed, kInitStream);
  PolicyPair pair{PolicyHead(config.family, "high", env.state_dim(), 2 * env.state_dim(), config, init),
                  PolicyHead(config.family, "low", env.action_dim(), 2 * env.state_dim(), config, init)};
  unpack(pair.high.params(), "high", snapshot);
  unpack(pair.low.params(), "low", snapshot);
  return pair;
}

}  // namespace flowhiql
