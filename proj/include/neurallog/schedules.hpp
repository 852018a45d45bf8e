#pragma once

// Adaptive regularization and confidence widths of the NeuralLog-UCB
// algorithms, as functions of the round and the gradient log-determinant.

#include <cstddef>

namespace neurallog {

struct ScheduleConstants {
  double C1 = 1.0;
  double C6 = 1.0;
  double C7 = 1.0;
  double S = 1.0;
  std::size_t depth = 2;
  double delta = 0.05;
  // Apply lambda_t := max(lambda_t, lambda0). Off by default: with unit
  // constants lambda0 exceeds lambda_1 on empty data.
  bool clamp_lambda_to_lambda0 = false;
};

struct Schedule {
  ScheduleConstants constants;
  double lambda0 = 0.0;
  double lambda_t = 0.0;
  double iota_t = 0.0;
  double nu1 = 1.0;
  double nu2 = 1.0;
  std::size_t t = 0;
};

// 8 sqrt(2) C1 sqrt(L) / S * log(4 / delta). Throws ConfigError unless
// delta is in (0, 1) and the other inputs are positive.
double init_lambda0(double C1, std::size_t depth, double S, double delta);

// Round-0 schedule: lambda = lambda0, widths evaluated on empty data with the
// confidence log taken at t = 1.
Schedule make_schedule(const ScheduleConstants& constants);

// Recomputes lambda_t, iota_t, nu1, nu2 from logdet =
// log det(sum_i g_i g_i^T / (4 m lambda0) + I) at round t >= 1.
Schedule update_schedule(const Schedule& sched, double logdet, std::size_t t);

// Step count and step size suggested by the theory (may be non-positive or
// tiny in practice; defaults come from configuration).
double theory_gd_iterations(double lambda_t, double S, std::size_t T, std::size_t depth,
                            double C4 = 1.0);
double theory_step_size(std::size_t width, std::size_t T, std::size_t depth,
                        double lambda_t, double C5 = 1.0);

struct WidthCheck {
  double required_width = 0.0;  // first line of the over-parameterization condition
  double required_width_log_ratio = 0.0;  // lower bound on m / log(m)^3
  bool satisfied = false;
};

// Informational only; never enforced.
WidthCheck width_condition(std::size_t width, std::size_t T, std::size_t K,
                           std::size_t depth, double delta, double lambda_H,
                           double lambda0, double R, double C0 = 1.0);

}  // namespace neurallog
