#pragma once

// Run orchestration: (algorithm x seed) regret simulations, 96% Student-t
// bands across seeds, the (nu, lambda) grid search and CSV export.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "neurallog/bandit.hpp"
#include "neurallog/concentration.hpp"
#include "neurallog/environment.hpp"

namespace neurallog {

struct EnvSpec {
  EnvKind kind = EnvKind::kH1;
  std::size_t dim = 20;
  std::size_t arms = 5;
  std::size_t horizon = 2000;
  std::string dataset_path;
};

struct AlgorithmSpec {
  std::string label;
  BanditConfig bandit;
};

struct SweepGrid {
  std::vector<double> nu = {0.01, 0.1, 1.0, 10.0, 100.0};
  std::vector<double> lambda = {0.01, 0.1, 1.0, 10.0, 100.0};
  // Seeds per grid cell (0: use `repeats`), drawn from base_seed + seed_offset.
  std::size_t repeats = 0;
  std::uint64_t seed_offset = 1000;
};

struct ExperimentConfig {
  EnvSpec env;
  std::vector<AlgorithmSpec> algorithms;
  std::size_t repeats = 10;
  std::uint64_t base_seed = 1;
  std::string output = "results.csv";
  std::size_t parallel = 1;
  SweepGrid sweep;
  MartingaleConfig bound;
  std::size_t bound_trials = 1000;

  // Throws ConfigError with a field-level message. An empty algorithm list is
  // allowed here (bound-only configs); run_experiment and sweep reject it.
  void validate() const;
};

struct SeedRun {
  std::string algorithm;
  std::size_t seed_index = 0;
  std::uint64_t seed = 0;
  std::vector<double> cum_regret;  // after rounds 1..T
  double kappa_star = 0.0;
  double wall_seconds = 0.0;
};

struct AlgorithmSummary {
  std::string algorithm;
  std::vector<double> mean;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  double final_mean() const { return mean.empty() ? 0.0 : mean.back(); }
};

struct RunResult {
  std::vector<SeedRun> runs;  // sorted by (algorithm order, seed index)
  std::vector<AlgorithmSummary> summaries;
  std::uint64_t config_hash = 0;
  std::uint64_t input_hash = 0;
  double wall_seconds = 0.0;
  double kappa_star = 0.0;  // mean over runs
};

// Seed of repeat i, shared by every algorithm so they face the same tape.
std::uint64_t environment_seed(std::uint64_t base_seed, std::size_t index);
std::uint64_t network_seed(std::uint64_t env_seed);

Environment make_environment(const EnvSpec& spec, std::shared_ptr<const Dataset> data,
                             std::uint64_t seed);

// Plays a policy through the horizon; returns cumulative regret per round.
// Policy needs select(const RoundData&) -> index and
// observe(const RoundData&, index, reward, t).
template <class Policy>
std::vector<double> simulate(Environment& env, Policy& policy) {
  std::vector<double> cum;
  cum.reserve(env.horizon());
  double total = 0.0;
  for (std::size_t t = 1; t <= env.horizon(); ++t) {
    const RoundData rd = env.round(t);
    const std::size_t k = policy.select(rd);
    const int r = env.sample_reward(rd, k);
    policy.observe(rd, k, r, t);
    total += env.regret_of(rd, k);
    cum.push_back(total);
  }
  return cum;
}

class BanditPolicy {
 public:
  BanditPolicy(const BanditConfig& config, std::size_t context_dim, std::uint64_t seed)
      : bandit_(config, context_dim, seed) {}
  std::size_t select(const RoundData& rd) const { return bandit_.select_arm(rd.contexts); }
  void observe(const RoundData& rd, std::size_t k, int r, std::size_t t) {
    bandit_.observe(rd.contexts.col(static_cast<Eigen::Index>(k)), r, t);
  }
  const Bandit& bandit() const { return bandit_; }

 private:
  Bandit bandit_;
};

SeedRun run_single(const EnvSpec& spec, std::shared_ptr<const Dataset> data,
                   const AlgorithmSpec& algo, std::size_t seed_index,
                   std::uint64_t base_seed);

// Mean and two-sided 96% Student-t interval across seeds, per round.
AlgorithmSummary summarize(const std::string& algorithm,
                           const std::vector<const SeedRun*>& runs);

// Loads the dataset once when the environment needs one.
std::shared_ptr<const Dataset> load_environment_data(const EnvSpec& spec);

// Throws ConfigError when the config lists no algorithms.
void require_algorithms(const ExperimentConfig& config);

RunResult run_experiment(const ExperimentConfig& config);

struct SweepRow {
  std::string algorithm;
  double nu = 0.0;
  double lambda = 0.0;
  double final_mean_cum_regret = 0.0;
};

struct SweepBest {
  std::string algorithm;
  double nu = 0.0;
  double lambda = 0.0;
  double final_mean_cum_regret = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> table;
  std::vector<SweepBest> best;  // one per algorithm, config order
};

// Full cross product per algorithm; minimizes the final mean cumulative
// regret, ties to the smaller nu then the smaller lambda.
SweepResult sweep(const ExperimentConfig& config, const SweepGrid& grid);

// Copy of `config` with each algorithm's nu and lambda taken from `result`.
ExperimentConfig apply_sweep(const ExperimentConfig& config, const SweepResult& result);

// round,algorithm,mean_cum_regret,ci_low,ci_high at `path` plus
// round,algorithm,seed,cum_regret at <stem>_per_seed.csv. Provenance goes in
// leading '#' comment lines. Throws InputError for an unwritable path.
void export_csv(const RunResult& result, const std::filesystem::path& path);
std::filesystem::path per_seed_path(const std::filesystem::path& path);

void export_sweep_csv(const SweepResult& result, const std::filesystem::path& path);

// FNV-1a 64-bit.
std::uint64_t content_hash(std::string_view bytes);

}  // namespace neurallog
