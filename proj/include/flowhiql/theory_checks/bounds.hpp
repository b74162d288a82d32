#pragma once

#include <span>
#include <string>
#include <vector>

#include "flowhiql/flow_core/coupling_flow.hpp"

namespace flowhiql {

/// Per-layer constants: d = transformed coordinates, S bounds |s(.)|_inf,
/// T bounds ||t(.)||_2.
struct LayerBound {
  std::size_t d = 0;
  double S = 0.0;
  double T = 0.0;
};

struct BoundConstants {
  double u_max = 0.0;
  double B = 0.0;
};

/// U_max = exp(sum S)(A_max + sum T);
/// B = d/2 log(2 pi) + U_max^2 / 2 + sum d_l S_l.
/// log p(a) >= -B for every ||a||_2 <= A_max.
BoundConstants bound_constants(std::size_t d, std::span<const LayerBound> layers, double a_max);

/// Architectural constants of a clamped flow (S = S_max, T = T_elem sqrt(d_l)).
/// Throws ConfigError for an unclamped flow.
std::vector<LayerBound> flow_layer_bounds(const ConditionalFlow& flow);
BoundConstants bound_constants(const ConditionalFlow& flow, double a_max);

struct BoundReport {
  std::size_t d = 0;
  std::vector<LayerBound> layers;
  double a_max = 0.0;
  double u_max = 0.0;
  double B = 0.0;
  double min_log_prob = 0.0;
  double margin = 0.0;  // min_log_prob + B
  std::size_t samples = 0;
  std::vector<double> worst_action;
  std::vector<double> worst_context;

  bool valid() const { return margin >= 0.0; }
};

/// Evaluates log p at n_actions points drawn uniformly from the ball of
/// radius a_max; point i uses context row i mod contexts.rows().
BoundReport check_lower_bound(const ConditionalFlow& flow, const ParamStore& params,
                              const Matrix& contexts, std::size_t n_actions, double a_max,
                              Random& rng);

/// Uniform draw from the d-ball of radius r centred at `center` (origin
/// when empty).
std::vector<double> sample_ball(Random& rng, std::size_t d, double r,
                                std::span<const double> center = {});
/// log of the volume of the d-ball of radius r.
double log_ball_volume(std::size_t d, double r);

std::string format_bound_report(const BoundReport& report);
std::string bound_csv_header();
std::string bound_csv_row(const std::string& label, const BoundReport& report);

}  // namespace flowhiql
