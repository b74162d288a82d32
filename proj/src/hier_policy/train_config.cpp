#include "flowhiql/hier_policy/train_config.hpp"

#include <cmath>

#include "flowhiql/errors.hpp"

namespace flowhiql {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ArgumentError(what);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void TrainConfig::validate() const {
  require(env.size() > 0, "env must be set");
  require(family == "flow" || family == "gaussian", "family must be 'flow' or 'gaussian'");
  require(eval_interval >= 1, "eval_interval must be at least 1");
  require(dataset_fraction > 0.0 && dataset_fraction <= 1.0, "dataset_fraction must lie in (0, 1]");
  require(k >= 1, "k must be at least 1");
  require(std::isfinite(beta) && beta >= 0.0, "beta must be >= 0");
  require(std::isfinite(w_max) && w_max > 1.0, "w_max must be > 1");
  require(tau > 0.0 && tau < 1.0, "tau must lie in (0, 1)");
  require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
  require(polyak > 0.0 && polyak <= 1.0, "polyak must lie in (0, 1]");
  require(batch_size >= 1, "batch_size must be at least 1");
  require(finite_positive(grad_clip), "grad_clip must be > 0");
  require(finite_positive(lr_value) && finite_positive(lr_high) && finite_positive(lr_low),
          "learning rates must be > 0");
  require(p_geometric >= 0.0 && p_uniform >= 0.0 && p_final >= 0.0 &&
              std::abs(p_geometric + p_uniform + p_final - 1.0) < 1e-9,
          "goal mixture probabilities must be >= 0 and sum to 1");
  require(!value_hidden.empty() && !policy_hidden.empty(), "hidden layer lists must be nonempty");
  for (auto h : value_hidden) require(h >= 1, "hidden sizes must be positive");
  for (auto h : policy_hidden) require(h >= 1, "hidden sizes must be positive");
  require(finite_positive(scale_clamp) && finite_positive(translate_clamp) &&
              finite_positive(log_std_clamp),
          "clamps must be > 0");
  require(eval_goals >= 1 && eval_episodes >= 1, "evaluation needs goals and episodes");
  require(std::isfinite(eval_high_noise) && eval_high_noise >= 0.0 &&
              std::isfinite(eval_low_noise) && eval_low_noise >= 0.0,
          "evaluation noise scales must be >= 0");
}

}  // namespace flowhiql
