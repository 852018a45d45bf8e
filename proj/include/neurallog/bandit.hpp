#pragma once

// NeuralLog-UCB-1, NeuralLog-UCB-2 and the NCBF-UCB / Logistic-UCB-1 /
// ada-OFU-ECOLog baselines behind one select/observe interface.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "neurallog/design_matrix.hpp"
#include "neurallog/neural_model.hpp"
#include "neurallog/schedules.hpp"

namespace neurallog {

enum class Algorithm {
  kNeuralLogUcb1,
  kNeuralLogUcb2,
  kNcbfUcb,
  kLogisticUcb1,
  kAdaOfuEcolog,
};

std::string_view algorithm_name(Algorithm algo);
// Accepts the names produced by algorithm_name. Throws ConfigError.
Algorithm parse_algorithm(std::string_view name);
bool is_neural(Algorithm algo);

struct BanditConfig {
  Algorithm algorithm = Algorithm::kNeuralLogUcb2;
  // Theory mode follows the algorithms as written (theta0 gradients, adaptive
  // lambda_t and widths, training every round from theta0). Only the two
  // NeuralLog algorithms support it.
  TrainMode mode = TrainMode::kPractical;

  std::size_t width = 20;
  std::size_t depth = 2;

  // Practical-mode exploration scale and fixed regularizer.
  double nu = 1.0;
  double lambda = 1.0;

  std::size_t retrain_every = 50;
  std::size_t gd_steps = 100;
  double gd_rate = 0.01;
  bool warm_start = true;  // practical mode only
  // Unset: averaged loss in practical mode, summed loss in theory mode.
  std::optional<bool> average_loss;

  double kappa = 10.0;
  double R = 0.25;
  double S = 1.0;
  double C1 = 1.0;
  double C6 = 1.0;
  double C7 = 1.0;
  double delta = 0.05;
  bool clamp_lambda_to_lambda0 = false;

  MatrixMode matrix_mode = MatrixMode::kDiag;

  // Throws ConfigError naming the offending field.
  void validate() const;
  ScheduleConstants schedule_constants() const;
};

struct ScoreParts {
  double mean = 0.0;
  double bonus = 0.0;
  double total() const { return mean + bonus; }
};

class Bandit {
 public:
  // `context_dim` is the agent-visible context length (even for the neural
  // algorithms). `seed` drives the network initialization.
  Bandit(const BanditConfig& config, std::size_t context_dim, std::uint64_t seed);

  ScoreParts score_parts(const Eigen::VectorXd& x) const;
  double ucb_score(const Eigen::VectorXd& x) const { return score_parts(x).total(); }

  // Arms are the columns of `arms`. Argmax of ucb_score, ties to the lowest
  // index. Throws InputError for an empty arm set.
  std::size_t select_arm(const Eigen::Ref<const Eigen::MatrixXd>& arms) const;

  // Records (x, r) at round t >= 1, updates the schedule, retrains when the
  // cadence fires and extends the design matrix. Throws InputError for r
  // outside {0, 1}.
  void observe(const Eigen::VectorXd& x, int r, std::size_t t);

  const BanditConfig& config() const { return config_; }
  std::size_t context_dim() const { return context_dim_; }
  const ObservationSet& history() const { return history_; }
  const DesignMatrix& design() const { return design_; }
  const Schedule& schedule() const { return schedule_; }
  const NetworkParams& params() const { return theta_; }
  const NetworkParams& initial_params() const { return theta0_; }
  const Eigen::VectorXd& linear_weights() const { return linear_w_; }
  // Number of completed training calls.
  std::size_t train_count() const { return train_count_; }
  // Data-adaptive dimension used by the practical-mode bonus.
  double practical_effective_dimension() const;

 private:
  double bonus_regularizer() const;
  void retrain();
  void fit_linear();

  BanditConfig config_;
  std::size_t context_dim_;
  bool neural_;
  bool average_loss_;

  NetworkParams theta0_;
  NetworkParams theta_;
  Eigen::VectorXd linear_w_;

  ObservationSet history_;
  DesignMatrix design_;        // V_t / W_t (or the linear analogues)
  DesignMatrix feature_gram_;  // unweighted sum of features, practical d-tilde
  DesignMatrix theta0_gram_;   // sum g(x;theta0) g^T / m, theory schedule
  Schedule schedule_;
  std::size_t train_count_ = 0;
};

}  // namespace neurallog
