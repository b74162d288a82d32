#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "flowhiql/theory_checks/bounds.hpp"

namespace flowhiql {

/// Uniform density on the ball of radius `radius` around `center`. Its
/// density is capped by M = 1 / volume.
class UniformBallBehavior {
 public:
  UniformBallBehavior(std::size_t dim, double radius, std::vector<double> center = {});

  std::size_t dim() const { return dim_; }
  double radius() const { return radius_; }
  const std::vector<double>& center() const { return center_; }
  double log_cap() const { return -log_ball_volume(dim_, radius_); }
  /// log density; -inf outside the support.
  double log_density(std::span<const double> a) const;
  std::vector<double> sample(Random& rng) const;
  /// Largest ||a||_2 over the support.
  double support_radius() const;

 private:
  std::size_t dim_;
  double radius_;
  std::vector<double> center_;
};

/// Kernel around a dataset action: a ball of radius `radius` whose centre is
/// `action` pulled inward so the whole ball lies within ||a||_2 <= a_max.
UniformBallBehavior dataset_kernel(std::span<const double> action, double radius, double a_max);

struct KlEstimate {
  double estimate = 0.0;
  double std_err = 0.0;
  double bound = 0.0;  // B + log M; 0 when not applicable
  std::size_t samples = 0;

  /// estimate <= bound + 3 std_err
  bool within_bound() const { return estimate <= bound + 3.0 * std_err; }
};

/// Monte-Carlo KL(p || q) = E_p[log p - log q] from n draws of p.
KlEstimate kl_monte_carlo(const std::function<std::vector<double>(Random&)>& sample_p,
                          const std::function<double(std::span<const double>)>& log_p,
                          const std::function<double(std::span<const double>)>& log_q,
                          std::size_t n, Random& rng);

/// KL(behavior || flow(. | context)) against the bound B + log M, where B
/// uses A_max = behavior.support_radius(). Throws ConfigError if the
/// behavior's support leaves the ball of radius a_max.
KlEstimate kl_cap_check(const UniformBallBehavior& behavior, const ConditionalFlow& flow,
                        const ParamStore& params, std::span<const double> context, std::size_t n,
                        Random& rng, double a_max = 1.0);

/// KL of the flow against itself: samples carry their own log-density and
/// are scored again through the inverse pass.
KlEstimate kl_self_check(const ConditionalFlow& flow, const ParamStore& params,
                         std::span<const double> context, std::size_t n, Random& rng);

std::string kl_csv_header();
std::string kl_csv_row(const std::string& label, const KlEstimate& kl);

}  // namespace flowhiql
