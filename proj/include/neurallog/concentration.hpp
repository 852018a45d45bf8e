#pragma once

// Monte Carlo check of the Bernstein-type self-normalized martingale bound
// against the kappa-inflated Hoeffding-style bound and the Faury et al. bound.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace neurallog {

enum class BoundVariant { kTheorem1, kHoeffdingKappa, kFaury };
inline constexpr std::array<BoundVariant, 3> kAllBoundVariants = {
    BoundVariant::kTheorem1, BoundVariant::kHoeffdingKappa, BoundVariant::kFaury};

std::string_view bound_variant_name(BoundVariant variant);

struct BoundInputs {
  std::size_t t = 0;
  double delta = 0.05;
  std::optional<double> M;
  std::optional<double> N;
  std::optional<double> lambda;
  std::optional<double> logdet_H;  // log det(H_t / lambda I)
  std::optional<double> logdet_V;  // log det(V_t / kappa lambda I)
  std::optional<std::size_t> dim;
  std::optional<double> kappa;
  std::optional<double> L_param;  // norm bound on x in the Faury bound
};

// theorem1:        8 sqrt(logdet_H log(4t^2/delta)) + 4MN/sqrt(lambda) log(4t^2/delta)
// hoeffding_kappa: M sqrt(kappa logdet_V + 2 kappa log(1/delta))
// faury:           2ML/sqrt(lambda) (logdet_H + log(1/delta) + d log 2) + sqrt(lambda)/(2ML)
// Throws InputError if an input the variant needs is missing.
double bound_value(BoundVariant variant, const BoundInputs& in);

enum class ContextMode {
  kIsotropic,  // i.i.d. uniform directions of norm N
  kAligned,    // every x_t equal to N e_1
  kZero,       // x_t = 0
};

struct MartingaleConfig {
  std::size_t dim = 5;
  std::size_t horizon = 500;
  double lambda = 1.0;
  double delta = 0.05;
  double M = 1.0;
  double N = 1.0;
  double theta_norm = 2.0;  // theta* = theta_norm * e_1
  ContextMode contexts = ContextMode::kIsotropic;

  void validate() const;
  // 1 / dmu(N ||theta*||), the worst reachable inverse variance.
  double kappa() const;
};

struct MartingaleTrial {
  std::vector<Eigen::VectorXd> x;
  std::vector<double> eta;  // centered Bernoulli noise r_t - mu(x_t^T theta*)
  std::vector<double> Z;    // ||s_t||_{H_t^{-1}}
  std::vector<double> logdet_H;
  std::vector<double> logdet_V;
  std::vector<std::array<double, 3>> bounds;  // indexed like kAllBoundVariants
  double kappa = 4.0;
};

// Simulates one trajectory; H_t^{-1} is maintained by rank-one updates.
MartingaleTrial run_martingale_trial(const MartingaleConfig& cfg, std::uint64_t seed);

struct TrialSummary {
  std::size_t trial = 0;
  std::array<double, 3> max_Z{};         // max_t Z_t (same for every variant)
  std::array<double, 3> bound_at_max{};  // bound at the argmax round
  std::array<bool, 3> violated{};        // Z_t > bound_t for some t
  std::array<double, 3> final_bound{};   // bound at t = horizon
  std::array<double, 3> min_ratio{};     // min_t bound_t / Z_t over Z_t > 0
  double final_Z = 0.0;
};

struct VariantReport {
  BoundVariant variant = BoundVariant::kTheorem1;
  std::size_t violations = 0;
  double violation_rate = 0.0;
  double std_error = 0.0;        // binomial sqrt(p(1-p)/n)
  double mean_slack = 0.0;       // mean of bound_T - Z_T
  double mean_final_bound = 0.0;
  // Quantiles (5%, 50%, 95%) of the per-trial min_t bound_t / Z_t.
  std::array<double, 3> ratio_quantiles{};
};

struct ViolationReport {
  MartingaleConfig config;
  std::size_t trials = 0;
  std::array<VariantReport, 3> variants;
  std::vector<TrialSummary> summaries;
};

// Trial i uses seed base_seed + i. Throws InputError for fewer than 100 trials.
ViolationReport violation_report(const MartingaleConfig& cfg, std::size_t trials,
                                 std::uint64_t base_seed = 1, std::size_t threads = 1);

// variant,trial,horizon,max_Z,bound_at_max,violated
void write_violation_csv(const ViolationReport& report, const std::filesystem::path& path);

}  // namespace neurallog
