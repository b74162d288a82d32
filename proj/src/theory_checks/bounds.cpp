#include "flowhiql/theory_checks/bounds.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "flowhiql/errors.hpp"
#include "flowhiql/format.hpp"

namespace flowhiql {

BoundConstants bound_constants(std::size_t d, std::span<const LayerBound> layers, double a_max) {
  if (d == 0) throw ArgumentError("dimension must be positive");
  if (!(a_max >= 0.0) || !std::isfinite(a_max)) throw ArgumentError("A_max must be >= 0");
  double sum_s = 0.0;
  double sum_t = 0.0;
  double sum_ds = 0.0;
  for (const auto& l : layers) {
    if (!(l.S >= 0.0 && l.T >= 0.0)) throw ArgumentError("layer bounds must be >= 0");
    sum_s += l.S;
    sum_t += l.T;
    sum_ds += static_cast<double>(l.d) * l.S;
  }
  BoundConstants c;
  c.u_max = std::exp(sum_s) * (a_max + sum_t);
  c.B = 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + 0.5 * c.u_max * c.u_max +
        sum_ds;
  return c;
}

std::vector<LayerBound> flow_layer_bounds(const ConditionalFlow& flow) {
  const FlowConfig& cfg = flow.config();
  if (!cfg.clamped) throw ConfigError("flow is not clamped; the density bound is not certifiable");
  std::vector<LayerBound> out;
  for (const auto& layer : flow.layers()) {
    const std::size_t dl = layer.transformed.size();
    out.push_back({dl, cfg.scale_clamp, cfg.translate_clamp * std::sqrt(static_cast<double>(dl))});
  }
  return out;
}

BoundConstants bound_constants(const ConditionalFlow& flow, double a_max) {
  return bound_constants(flow.dim(), flow_layer_bounds(flow), a_max);
}

std::vector<double> sample_ball(Random& rng, std::size_t d, double r,
                                std::span<const double> center) {
  std::vector<double> x(d);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& v : x) {
      v = rng.normal();
      norm += v * v;
    }
  } while (norm == 0.0);
  const double radius = r * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
  const double scale = radius / std::sqrt(norm);
  for (std::size_t i = 0; i < d; ++i) x[i] = x[i] * scale + (center.empty() ? 0.0 : center[i]);
  return x;
}

double log_ball_volume(std::size_t d, double r) {
  const double h = 0.5 * static_cast<double>(d);
  return h * std::log(std::numbers::pi) + static_cast<double>(d) * std::log(r) -
         std::lgamma(h + 1.0);
}

BoundReport check_lower_bound(const ConditionalFlow& flow, const ParamStore& params,
                              const Matrix& contexts, std::size_t n_actions, double a_max,
                              Random& rng) {
  if (n_actions < 10000) throw ArgumentError("the lower-bound audit needs at least 10^4 actions");
  if (contexts.rows() == 0) throw ArgumentError("the lower-bound audit needs at least one context");
  BoundReport report;
  report.d = flow.dim();
  report.layers = flow_layer_bounds(flow);
  report.a_max = a_max;
  const BoundConstants c = bound_constants(report.d, report.layers, a_max);
  report.u_max = c.u_max;
  report.B = c.B;
  report.samples = n_actions;

  const auto n = static_cast<Eigen::Index>(n_actions);
  Matrix x(n, static_cast<Eigen::Index>(report.d));
  Matrix ctx(n, contexts.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto a = sample_ball(rng, report.d, a_max);
    for (std::size_t j = 0; j < report.d; ++j) x(i, static_cast<Eigen::Index>(j)) = a[j];
    ctx.row(i) = contexts.row(i % contexts.rows());
  }
  const Matrix lp = flow.log_prob(params, x, ctx);
  Eigen::Index worst = 0;
  report.min_log_prob = lp.col(0).minCoeff(&worst);
  report.margin = report.min_log_prob + report.B;
  report.worst_action.assign(x.row(worst).data(), x.row(worst).data() + x.cols());
  report.worst_context.assign(ctx.row(worst).data(), ctx.row(worst).data() + ctx.cols());
  return report;
}

std::string format_bound_report(const BoundReport& r) {
  std::ostringstream out;
  out << "log-density lower bound\n";
  out << "  d = " << r.d << ", layers = " << r.layers.size() << ", A_max = " << fmt(r.a_max) << "\n";
  for (std::size_t l = 0; l < r.layers.size(); ++l) {
    out << "  layer " << l << ": d_l = " << r.layers[l].d << ", S_l = " << fmt(r.layers[l].S)
        << ", T_l = " << fmt(r.layers[l].T) << "\n";
  }
  out << "  U_max = " << fmt(r.u_max) << "\n";
  out << "  B = " << fmt(r.B) << "\n";
  out << "  min log p = " << fmt(r.min_log_prob) << " over " << r.samples << " samples\n";
  out << "  margin = " << fmt(r.margin) << (r.valid() ? " (ok)" : " (VIOLATED)") << "\n";
  if (!r.valid()) {
    out << "  worst action =";
    for (double v : r.worst_action) out << " " << fmt(v);
    out << "\n";
  }
  return out.str();
}

std::string bound_csv_header() { return "label,d,layers,a_max,u_max,B,min_log_prob,margin,samples,valid"; }

std::string bound_csv_row(const std::string& label, const BoundReport& r) {
  std::ostringstream out;
  out << label << "," << r.d << "," << r.layers.size() << "," << fmt(r.a_max) << "," << fmt(r.u_max)
      << "," << fmt(r.B) << "," << fmt(r.min_log_prob) << "," << fmt(r.margin) << "," << r.samples
      << "," << (r.valid() ? 1 : 0);
  return out.str();
}

}  // namespace flowhiql
