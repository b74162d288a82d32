#include "flowhiql/theory_checks/kl_cap.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "flowhiql/errors.hpp"
#include "flowhiql/format.hpp"

namespace flowhiql {

namespace {

KlEstimate summarize(const std::vector<double>& terms) {
  KlEstimate kl;
  const double n = static_cast<double>(terms.size());
  for (double t : terms) kl.estimate += t / n;
  double ss = 0.0;
  for (double t : terms) ss += (t - kl.estimate) * (t - kl.estimate);
  kl.std_err = std::sqrt(ss / (n - 1.0) / n);
  kl.samples = terms.size();
  return kl;
}

}  // namespace

UniformBallBehavior::UniformBallBehavior(std::size_t dim, double radius, std::vector<double> center)
    : dim_(dim), radius_(radius), center_(std::move(center)) {
  if (dim == 0 || !(radius > 0.0)) throw ArgumentError("ball behavior needs dim >= 1 and radius > 0");
  if (center_.empty()) center_.assign(dim, 0.0);
  if (center_.size() != dim) throw ConfigError("ball centre has the wrong dimension");
}

double UniformBallBehavior::log_density(std::span<const double> a) const {
  double sq = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) sq += (a[i] - center_[i]) * (a[i] - center_[i]);
  if (std::sqrt(sq) > radius_) return -std::numeric_limits<double>::infinity();
  return log_cap();
}

std::vector<double> UniformBallBehavior::sample(Random& rng) const {
  return sample_ball(rng, dim_, radius_, center_);
}

double UniformBallBehavior::support_radius() const {
  double sq = 0.0;
  for (double c : center_) sq += c * c;
  return std::sqrt(sq) + radius_;
}

UniformBallBehavior dataset_kernel(std::span<const double> action, double radius, double a_max) {
  if (!(radius > 0.0 && radius < a_max)) throw ArgumentError("kernel radius must lie in (0, A_max)");
  std::vector<double> c(action.begin(), action.end());
  double norm = 0.0;
  for (double v : c) norm += v * v;
  norm = std::sqrt(norm);
  const double limit = a_max - radius;
  if (norm > limit) {
    for (double& v : c) v *= limit / norm;
  }
  const std::size_t dim = c.size();
  return UniformBallBehavior(dim, radius, std::move(c));
}

KlEstimate kl_monte_carlo(const std::function<std::vector<double>(Random&)>& sample_p,
                          const std::function<double(std::span<const double>)>& log_p,
                          const std::function<double(std::span<const double>)>& log_q,
                          std::size_t n, Random& rng) {
  if (n < 2) throw ArgumentError("KL estimate needs at least 2 samples");
  std::vector<double> terms(n);
  for (auto& t : terms) {
    const auto x = sample_p(rng);
    t = log_p(x) - log_q(x);
  }
  return summarize(terms);
}

KlEstimate kl_cap_check(const UniformBallBehavior& behavior, const ConditionalFlow& flow,
                        const ParamStore& params, std::span<const double> context, std::size_t n,
                        Random& rng, double a_max) {
  if (behavior.dim() != flow.dim()) throw ConfigError("behavior and flow dimensions differ");
  if (behavior.support_radius() > a_max * (1.0 + 1e-12)) {
    throw ConfigError("behavior support leaves the action ball");
  }
  if (n < 2) throw ArgumentError("KL estimate needs at least 2 samples");
  const auto rows = static_cast<Eigen::Index>(n);
  Matrix x(rows, static_cast<Eigen::Index>(flow.dim()));
  Matrix ctx(rows, static_cast<Eigen::Index>(context.size()));
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto a = behavior.sample(rng);
    for (std::size_t j = 0; j < a.size(); ++j) x(i, static_cast<Eigen::Index>(j)) = a[j];
    for (std::size_t j = 0; j < context.size(); ++j) ctx(i, static_cast<Eigen::Index>(j)) = context[j];
  }
  const Matrix lq = flow.log_prob(params, x, ctx);
  std::vector<double> terms(n);
  for (Eigen::Index i = 0; i < rows; ++i) {
    terms[static_cast<std::size_t>(i)] = behavior.log_cap() - lq(i, 0);
  }
  KlEstimate kl = summarize(terms);
  kl.bound = bound_constants(flow, behavior.support_radius()).B + behavior.log_cap();
  return kl;
}

KlEstimate kl_self_check(const ConditionalFlow& flow, const ParamStore& params,
                         std::span<const double> context, std::size_t n, Random& rng) {
  if (n < 2) throw ArgumentError("KL estimate needs at least 2 samples");
  const auto rows = static_cast<Eigen::Index>(n);
  Matrix noise(rows, static_cast<Eigen::Index>(flow.dim()));
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = rng.normal();
  Matrix ctx(rows, static_cast<Eigen::Index>(context.size()));
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < context.size(); ++j) ctx(i, static_cast<Eigen::Index>(j)) = context[j];
  }
  Matrix lp;
  const Matrix x = flow.push_forward(params, noise, ctx, &lp);
  const Matrix lq = flow.log_prob(params, x, ctx);
  std::vector<double> terms(n);
  for (Eigen::Index i = 0; i < rows; ++i) terms[static_cast<std::size_t>(i)] = lp(i, 0) - lq(i, 0);
  return summarize(terms);
}

std::string kl_csv_header() { return "label,kl_estimate,std_err,bound,samples,within_bound"; }

std::string kl_csv_row(const std::string& label, const KlEstimate& kl) {
  std::ostringstream out;
  out << label << "," << fmt(kl.estimate) << "," << fmt(kl.std_err) << "," << fmt(kl.bound) << ","
      << kl.samples << "," << (kl.within_bound() ? 1 : 0);
  return out.str();
}

}  // namespace flowhiql
