#include "neurallog/bandit.hpp"

#include <array>
#include <limits>
#include <cmath>
#include <sstream>
#include <utility>

#include "neurallog/errors.hpp"
#include "neurallog/link.hpp"

namespace neurallog {

namespace {

constexpr std::array<std::pair<Algorithm, std::string_view>, 5> kAlgorithmNames = {{
    {Algorithm::kNeuralLogUcb1, "neurallog_ucb1"},
    {Algorithm::kNeuralLogUcb2, "neurallog_ucb2"},
    {Algorithm::kNcbfUcb, "ncbf_ucb"},
    {Algorithm::kLogisticUcb1, "logistic_ucb1"},
    {Algorithm::kAdaOfuEcolog, "ada_ofu_ecolog"},
}};

[[noreturn]] void config_fail(const std::string& field, const std::string& why) {
  throw ConfigError("algorithm." + field + ": " + why);
}

}  // namespace

std::string_view algorithm_name(Algorithm algo) {
  for (const auto& [a, name] : kAlgorithmNames) {
    if (a == algo) return name;
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (const auto& [a, n] : kAlgorithmNames) {
    if (n == name) return a;
  }
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

bool is_neural(Algorithm algo) {
  return algo == Algorithm::kNeuralLogUcb1 || algo == Algorithm::kNeuralLogUcb2 ||
         algo == Algorithm::kNcbfUcb;
}

void BanditConfig::validate() const {
  const bool ours =
      algorithm == Algorithm::kNeuralLogUcb1 || algorithm == Algorithm::kNeuralLogUcb2;
  if (mode == TrainMode::kTheory && !ours) {
    config_fail("mode", "theory mode is only defined for neurallog_ucb1/neurallog_ucb2");
  }
  if (is_neural(algorithm)) {
    if (width == 0 || width % 2 != 0) config_fail("m", "width must be positive and even");
    if (depth < 2) config_fail("L", "depth must be at least 2");
  }
  if (!(nu >= 0.0)) config_fail("nu", "must be non-negative");
  if (!(lambda > 0.0)) config_fail("lambda", "must be positive");
  if (retrain_every == 0) config_fail("retrain_every", "must be at least 1");
  if (!(gd_rate > 0.0)) config_fail("gd_rate", "must be positive");
  if (!(kappa >= 1.0)) config_fail("kappa", "must be at least 1");
  if (!(R > 0.0)) config_fail("R", "must be positive");
  if (!(S > 0.0)) config_fail("S", "must be positive");
  if (!(C1 > 0.0) || !(C6 > 0.0) || !(C7 > 0.0)) config_fail("C1/C6/C7", "must be positive");
  if (!(delta > 0.0 && delta < 1.0)) config_fail("delta", "must lie in (0, 1)");
}

ScheduleConstants BanditConfig::schedule_constants() const {
  ScheduleConstants c;
  c.C1 = C1;
  c.C6 = C6;
  c.C7 = C7;
  c.S = S;
  c.depth = depth;
  c.delta = delta;
  c.clamp_lambda_to_lambda0 = clamp_lambda_to_lambda0;
  return c;
}

Bandit::Bandit(const BanditConfig& config, std::size_t context_dim, std::uint64_t seed)
    : config_(config), context_dim_(context_dim), neural_(is_neural(config.algorithm)) {
  config_.validate();
  if (context_dim == 0) throw ConfigError("context dimension must be positive");
  average_loss_ = config_.average_loss.value_or(config_.mode == TrainMode::kPractical);
  history_ = ObservationSet(context_dim);
  schedule_ = make_schedule(config_.schedule_constants());

  std::size_t feature_dim = context_dim;
  if (neural_) {
    theta0_ = init_network(context_dim, config_.width, config_.depth, seed);
    theta_ = theta0_;
    feature_dim = theta0_.size();
  } else {
    linear_w_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(context_dim));
  }
  design_ = DesignMatrix(feature_dim, config_.matrix_mode);
  if (config_.mode == TrainMode::kTheory) {
    theta0_gram_ = DesignMatrix(feature_dim, config_.matrix_mode);
  } else {
    feature_gram_ = DesignMatrix(feature_dim, config_.matrix_mode);
  }
  design_.prepare(bonus_regularizer());
}

double Bandit::bonus_regularizer() const {
  const bool theory = config_.mode == TrainMode::kTheory;
  const double lambda = theory ? schedule_.lambda_t : config_.lambda;
  switch (config_.algorithm) {
    case Algorithm::kNeuralLogUcb1:
    case Algorithm::kNcbfUcb:
    case Algorithm::kLogisticUcb1:
      return config_.kappa * lambda;
    case Algorithm::kNeuralLogUcb2:
    case Algorithm::kAdaOfuEcolog:
      return lambda;
  }
  return lambda;
}

double Bandit::practical_effective_dimension() const {
  if (config_.mode == TrainMode::kTheory) return 0.0;
  const double scale =
      config_.algorithm == Algorithm::kNcbfUcb ? 1.0 / config_.kappa : config_.R;
  return feature_gram_.logdet_ratio(scale);
}

ScoreParts Bandit::score_parts(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != context_dim_) {
    throw InputError("ucb_score: context has the wrong dimension");
  }
  const double reg = bonus_regularizer();
  ScoreParts out;

  if (config_.mode == TrainMode::kTheory) {
    const double sqrt_m = std::sqrt(static_cast<double>(config_.width));
    Eigen::VectorXd g0;
    forward_and_gradient(theta0_, x, g0);
    const double width_norm = design_.inv_norm(g0 / sqrt_m, reg);
    if (config_.algorithm == Algorithm::kNeuralLogUcb1) {
      out.mean = sigmoid(forward(theta_, x));
      out.bonus = config_.R * std::sqrt(config_.kappa) * schedule_.nu1 * width_norm;
    } else {
      out.mean = g0.dot(theta_.flat() - theta0_.flat());
      out.bonus = schedule_.nu2 * width_norm;
    }
    return out;
  }

  const double dim_factor = std::sqrt(practical_effective_dimension()) + 1.0;
  const double S = config_.S;
  if (!neural_) {
    const double logit = linear_w_.dot(x);
    const double width_norm = design_.inv_norm(x, reg);
    if (config_.algorithm == Algorithm::kLogisticUcb1) {
      out.mean = sigmoid(logit);
      out.bonus = config_.nu * std::sqrt(config_.kappa) * S * dim_factor * width_norm;
    } else {
      out.mean = logit;
      out.bonus = config_.nu * S * dim_factor * width_norm;
    }
    return out;
  }

  Eigen::VectorXd g;
  const double f = forward_and_gradient(theta_, x, g);
  const double width_norm = design_.inv_norm(g, reg);
  switch (config_.algorithm) {
    case Algorithm::kNcbfUcb:
      out.mean = sigmoid(f);
      out.bonus = config_.nu * config_.kappa * S * dim_factor * width_norm;
      break;
    case Algorithm::kNeuralLogUcb1:
      out.mean = sigmoid(f);
      out.bonus = config_.nu * config_.R * std::sqrt(config_.kappa) * S * S * dim_factor *
                  width_norm;
      break;
    default:
      out.mean = f;
      out.bonus = config_.nu * S * S * dim_factor * width_norm;
      break;
  }
  return out;
}

std::size_t Bandit::select_arm(const Eigen::Ref<const Eigen::MatrixXd>& arms) const {
  if (arms.cols() == 0) throw InputError("select_arm: empty arm set");
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < arms.cols(); ++k) {
    const double s = ucb_score(arms.col(k));
    if (s > best_score) {
      best_score = s;
      best = static_cast<std::size_t>(k);
    }
  }
  return best;
}

void Bandit::retrain() {
  TrainOptions opts;
  opts.lambda = config_.mode == TrainMode::kTheory ? schedule_.lambda_t : config_.lambda;
  opts.step_size = config_.gd_rate;
  opts.iterations = config_.gd_steps;
  opts.mode = config_.mode;
  opts.average_loss = average_loss_;
  const bool warm = config_.mode == TrainMode::kPractical && config_.warm_start;
  theta_ = train_nn(history_, theta0_, warm ? theta_ : theta0_, opts).params;
  ++train_count_;
}

void Bandit::fit_linear() {
  const auto X = history_.contexts();
  const auto r = history_.rewards();
  const double n = static_cast<double>(history_.size());
  const double scale = average_loss_ ? 1.0 / n : 1.0;
  Eigen::VectorXd w = config_.warm_start ? linear_w_ : Eigen::VectorXd::Zero(linear_w_.size());
  for (std::size_t j = 0; j < config_.gd_steps; ++j) {
    Eigen::VectorXd residual = X.transpose() * w;
    for (Eigen::Index i = 0; i < residual.size(); ++i) {
      residual(i) = sigmoid(residual(i)) - r(i);
    }
    const Eigen::VectorXd grad = scale * (X * residual + 2.0 * config_.lambda * w);
    w -= config_.gd_rate * grad;
  }
  if (!w.allFinite()) throw DivergenceError("linear fit: non-finite weights", config_.gd_steps);
  linear_w_ = std::move(w);
  ++train_count_;
}

void Bandit::observe(const Eigen::VectorXd& x, int r, std::size_t t) {
  if (r != 0 && r != 1) throw InputError("observe: reward must be 0 or 1");
  if (t < 1) throw InputError("observe: rounds are numbered from 1");
  history_.append(x, r);

  if (config_.mode == TrainMode::kTheory) {
    const double inv_m = 1.0 / static_cast<double>(config_.width);
    Eigen::VectorXd g0;
    forward_and_gradient(theta0_, x, g0);
    theta0_gram_.update(g0, inv_m);
    const double logdet = theta0_gram_.logdet_ratio(0.25 / schedule_.lambda0);
    schedule_ = update_schedule(schedule_, logdet, t);
    retrain();
    double w = inv_m;
    if (config_.algorithm == Algorithm::kNeuralLogUcb2) {
      w = sigmoid_derivative(forward(theta_, x)) * inv_m;
    }
    design_.update(g0, w);
    design_.prepare(bonus_regularizer());
    return;
  }

  if (!neural_) {
    if (t % config_.retrain_every == 0) fit_linear();
    double w = 1.0;
    if (config_.algorithm == Algorithm::kAdaOfuEcolog) {
      w = sigmoid_derivative(linear_w_.dot(x));
    }
    design_.update(x, w);
    feature_gram_.update(x, 1.0);
    design_.prepare(bonus_regularizer());
    return;
  }

  if (t % config_.retrain_every == 0) retrain();
  Eigen::VectorXd g;
  const double f = forward_and_gradient(theta_, x, g);
  const double w =
      config_.algorithm == Algorithm::kNeuralLogUcb2 ? sigmoid_derivative(f) : 1.0;
  design_.update(g, w);
  feature_gram_.update(g, 1.0);
  design_.prepare(bonus_regularizer());
}

}  // namespace neurallog
