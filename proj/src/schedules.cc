#include "neurallog/schedules.hpp"

#include <algorithm>
#include <cmath>

#include "neurallog/errors.hpp"

namespace neurallog {

namespace {

double confidence_log(std::size_t t, double delta) {
  const double td = static_cast<double>(std::max<std::size_t>(t, 1));
  return std::log(4.0 * td * td / delta);
}

void fill_widths(Schedule& s, double logdet, std::size_t t) {
  const auto& c = s.constants;
  const double L = static_cast<double>(c.depth);
  const double lg = confidence_log(t, c.delta);
  s.iota_t = 16.0 * std::sqrt(logdet * lg) + 8.0 * c.C1 * std::sqrt(L / s.lambda0) * lg;
  const double shape = 1.0 + std::sqrt(L) * c.S + L * c.S * c.S;
  s.nu1 = c.C6 * shape * s.iota_t + 1.0;
  s.nu2 = c.C7 * shape * s.iota_t + 1.0;
}

void validate(const ScheduleConstants& c) {
  if (!(c.delta > 0.0 && c.delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (!(c.C1 > 0.0) || !(c.C6 > 0.0) || !(c.C7 > 0.0)) {
    throw ConfigError("schedule constants C1, C6, C7 must be positive");
  }
  if (!(c.S > 0.0)) throw ConfigError("norm parameter S must be positive");
  if (c.depth < 1) throw ConfigError("depth must be positive");
}

}  // namespace

double init_lambda0(double C1, std::size_t depth, double S, double delta) {
  ScheduleConstants c;
  c.C1 = C1;
  c.depth = depth;
  c.S = S;
  c.delta = delta;
  validate(c);
  return 8.0 * std::sqrt(2.0) * C1 * std::sqrt(static_cast<double>(depth)) / S *
         std::log(4.0 / delta);
}

Schedule make_schedule(const ScheduleConstants& constants) {
  Schedule s;
  s.constants = constants;
  s.lambda0 = init_lambda0(constants.C1, constants.depth, constants.S, constants.delta);
  s.lambda_t = s.lambda0;
  fill_widths(s, 0.0, 0);
  s.t = 0;
  return s;
}

Schedule update_schedule(const Schedule& sched, double logdet, std::size_t t) {
  if (!(logdet >= 0.0)) throw InputError("update_schedule: logdet must be non-negative");
  if (t < 1) throw InputError("update_schedule: round must be at least 1");
  Schedule s = sched;
  const auto& c = s.constants;
  const double L = static_cast<double>(c.depth);
  const double lg = confidence_log(t, c.delta);
  const double S2 = c.S * c.S;
  s.lambda_t = 64.0 / S2 * logdet * lg + 16.0 * c.C1 * c.C1 * L / (S2 * s.lambda0) * lg * lg;
  if (c.clamp_lambda_to_lambda0) s.lambda_t = std::max(s.lambda_t, s.lambda0);
  fill_widths(s, logdet, t);
  s.t = t;
  return s;
}

double theory_gd_iterations(double lambda_t, double S, std::size_t T, std::size_t depth,
                            double C4) {
  const double Td = static_cast<double>(T);
  const double L = static_cast<double>(depth);
  return 2.0 * std::log(lambda_t * S / (std::sqrt(Td) * lambda_t + C4 * std::pow(Td, 1.5) * L)) *
         Td * L / lambda_t;
}

double theory_step_size(std::size_t width, std::size_t T, std::size_t depth,
                        double lambda_t, double C5) {
  const double m = static_cast<double>(width);
  return C5 / (m * static_cast<double>(T) * static_cast<double>(depth) + m * lambda_t);
}

WidthCheck width_condition(std::size_t width, std::size_t T, std::size_t K,
                           std::size_t depth, double delta, double lambda_H,
                           double lambda0, double R, double C0) {
  const double Td = static_cast<double>(T);
  const double Kd = static_cast<double>(K);
  const double L = static_cast<double>(depth);
  WidthCheck out;
  const double first = std::pow(Td * Kd, 4) * std::pow(L, 6) *
                       std::log(Td * Td * Kd * Kd * L / delta) / std::pow(lambda_H, 4);
  const double second = std::pow(L, -1.5) * std::sqrt(lambda0) *
                        std::pow(std::log(Td * Kd * L * L / delta), 1.5);
  out.required_width = C0 * std::max(first, second);
  const double R6 = std::pow(R, 6);
  out.required_width_log_ratio =
      C0 * (std::pow(Td, 7) * std::pow(L, 21) / lambda0 +
            std::pow(Td, 16) * std::pow(L, 27) * std::pow(lambda0, -7) * R6 +
            std::pow(Td, 10) * std::pow(L, 21) * std::pow(lambda0, -4) * R6 +
            std::pow(Td, 7) * std::pow(L, 18) * std::pow(lambda0, -4));
  const double m = static_cast<double>(width);
  const double log_m = std::log(m);
  out.satisfied = m >= out.required_width && log_m > 0.0 &&
                  m / std::pow(log_m, 3) >= out.required_width_log_ratio;
  return out;
}

}  // namespace neurallog
