#pragma once

// Logistic bandit environments: synthetic hidden reward functions and
// classification datasets posed as K-armed problems.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace neurallog {

enum class EnvKind { kH1, kH2, kH3, kDataset, kCustom };

std::string_view env_kind_name(EnvKind kind);
EnvKind parse_env_kind(std::string_view name);

// [x; x] / (sqrt(2) ||x||). Throws InputError for a zero vector, or when
// `raw_dim` is given and does not match (catches double symmetrization).
Eigen::VectorXd symmetrize_context(const Eigen::VectorXd& x,
                                   std::optional<std::size_t> raw_dim = std::nullopt);

struct RoundData {
  std::size_t t = 0;
  Eigen::MatrixXd raw;       // raw features, one arm per column
  Eigen::MatrixXd contexts;  // agent-visible symmetrized contexts
  Eigen::VectorXd logits;    // hidden h(x) per arm (+-inf for datasets)
  Eigen::VectorXd probs;     // success probability per arm
  double uniform = 0.0;      // this round's reward draw
  std::size_t optimal_arm() const;
};

// Min-max normalized features (one row per sample) with integer labels.
struct Dataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  std::size_t num_classes = 0;
};

// CSV: header row, numeric feature columns, final `label` column holding
// integers in [0, K). Each column is mapped to [-1, 1] by
// 2 (x - min) / (max - min) - 1; constant columns map to 0.
// Throws InputError for malformed files or out-of-range labels.
Dataset load_dataset_csv(const std::filesystem::path& path, std::size_t num_classes);

class Environment {
 public:
  using HiddenFunction = std::function<double(const Eigen::VectorXd&)>;

  // h1 = 0.2 (x^T theta)^4, h2 = 20 cos(x^T theta), h3 = 5 x^T Theta x with
  // hidden entries Unif(-1, 1); raw arms have Unif(-1, 1) entries scaled to
  // unit norm.
  static Environment synthetic(EnvKind kind, std::size_t dim, std::size_t arms,
                               std::size_t horizon, std::uint64_t seed);
  // Same arm distribution with a caller-supplied hidden logit function.
  static Environment custom(std::size_t dim, std::size_t arms, std::size_t horizon,
                            std::uint64_t seed, HiddenFunction h);
  // Arm k places the row's features in block k of a (d K)-vector. Reward is
  // 1 exactly when the chosen block matches the label.
  static Environment from_dataset(std::shared_ptr<const Dataset> data, std::size_t horizon,
                                  std::uint64_t seed);

  EnvKind kind() const { return kind_; }
  std::size_t raw_dim() const { return raw_dim_; }
  std::size_t context_dim() const { return 2 * raw_dim_; }
  std::size_t arms() const { return arms_; }
  std::size_t horizon() const { return horizon_; }
  std::uint64_t seed() const { return seed_; }

  // Pure function of (seed, t). Throws InputError for t outside [1, T].
  RoundData round(std::size_t t) const;

  int sample_reward(const RoundData& round, std::size_t arm) const;

  // mu(h(x*)) - mu(h(x_chosen)); also accumulates dmu(h(x*)) for kappa_star.
  double regret_of(const RoundData& round, std::size_t chosen);

  // (mean over accounted rounds of dmu(h(x_t*)))^{-1}; infinity when the sum
  // is zero (deterministic datasets).
  double kappa_star() const;
  std::size_t accounted_rounds() const { return accounted_rounds_; }

  // max |h| over every arm of every round in the horizon.
  double max_abs_logit() const;

  const Eigen::VectorXd& hidden_vector() const { return theta_; }
  const Eigen::MatrixXd& hidden_matrix() const { return Theta_; }

 private:
  Environment() = default;
  double hidden_logit(const Eigen::VectorXd& raw) const;

  EnvKind kind_ = EnvKind::kH1;
  std::size_t raw_dim_ = 0;
  std::size_t arms_ = 0;
  std::size_t horizon_ = 0;
  std::uint64_t seed_ = 0;
  Eigen::VectorXd theta_;
  Eigen::MatrixXd Theta_;
  HiddenFunction custom_;
  std::shared_ptr<const Dataset> data_;
  std::vector<std::size_t> row_order_;

  double optimal_dmu_sum_ = 0.0;
  std::size_t accounted_rounds_ = 0;
};

}  // namespace neurallog
