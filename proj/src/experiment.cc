#include "neurallog/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "neurallog/config.hpp"
#include "neurallog/errors.hpp"
#include "neurallog/float_env.hpp"
#include "neurallog/parallel.hpp"

namespace neurallog {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::uint64_t input_hash_of(const EnvSpec& spec) {
  if (spec.kind == EnvKind::kDataset) return content_hash(read_file_bytes(spec.dataset_path));
  std::ostringstream os;
  os << env_kind_name(spec.kind) << ',' << spec.dim << ',' << spec.arms << ',' << spec.horizon;
  return content_hash(os.str());
}

}  // namespace

void ExperimentConfig::validate() const {
  if (env.horizon < 1) throw ConfigError("env.T: must be at least 1");
  if (env.arms < 1) throw ConfigError("env.K: must be at least 1");
  if (env.kind == EnvKind::kCustom) throw ConfigError("env.kind: 'custom' is not configurable");
  if (env.kind == EnvKind::kDataset) {
    if (env.dataset_path.empty()) throw ConfigError("env.dataset_path: required for datasets");
  } else if (env.dim < 1) {
    throw ConfigError("env.d: must be at least 1");
  }
  if (repeats < 1) throw ConfigError("repeats: must be at least 1");
  if (parallel < 1) throw ConfigError("parallel: must be at least 1");
  for (std::size_t i = 0; i < algorithms.size(); ++i) {
    try {
      algorithms[i].bandit.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("algorithms[" + std::to_string(i) + "]: " + e.what());
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (algorithms[j].label == algorithms[i].label) {
        throw ConfigError("algorithms[" + std::to_string(i) + "].label: duplicate '" +
                          algorithms[i].label + "'");
      }
    }
  }
  if (sweep.nu.empty()) throw ConfigError("sweep.nu: grid must not be empty");
  if (sweep.lambda.empty()) throw ConfigError("sweep.lambda: grid must not be empty");
  for (double v : sweep.lambda) {
    if (!(v > 0)) throw ConfigError("sweep.lambda: values must be positive");
  }
  for (double v : sweep.nu) {
    if (!(v >= 0)) throw ConfigError("sweep.nu: values must be non-negative");
  }
  try {
    bound.validate();
  } catch (const InputError& e) {
    throw ConfigError(std::string("bound: ") + e.what());
  }
  if (bound_trials < 1) throw ConfigError("bound.trials: must be at least 1");
}

std::uint64_t environment_seed(std::uint64_t base_seed, std::size_t index) {
  return base_seed + index;
}

std::uint64_t network_seed(std::uint64_t env_seed) {
  return splitmix64(env_seed ^ 0x6e657477726b0001ULL);
}

Environment make_environment(const EnvSpec& spec, std::shared_ptr<const Dataset> data,
                             std::uint64_t seed) {
  if (spec.kind == EnvKind::kDataset) {
    if (!data) throw InputError("dataset environment needs loaded data");
    return Environment::from_dataset(std::move(data), spec.horizon, seed);
  }
  return Environment::synthetic(spec.kind, spec.dim, spec.arms, spec.horizon, seed);
}

std::shared_ptr<const Dataset> load_environment_data(const EnvSpec& spec) {
  if (spec.kind != EnvKind::kDataset) return nullptr;
  return std::make_shared<const Dataset>(load_dataset_csv(spec.dataset_path, spec.arms));
}

SeedRun run_single(const EnvSpec& spec, std::shared_ptr<const Dataset> data,
                   const AlgorithmSpec& algo, std::size_t seed_index,
                   std::uint64_t base_seed) {
  const FlushDenormals flush;
  const auto start = std::chrono::steady_clock::now();
  SeedRun run;
  run.algorithm = algo.label;
  run.seed_index = seed_index;
  run.seed = environment_seed(base_seed, seed_index);
  Environment env = make_environment(spec, std::move(data), run.seed);
  BanditPolicy policy(algo.bandit, env.context_dim(), network_seed(run.seed));
  run.cum_regret = simulate(env, policy);
  run.kappa_star = env.kappa_star();
  run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

AlgorithmSummary summarize(const std::string& algorithm,
                           const std::vector<const SeedRun*>& runs) {
  AlgorithmSummary s;
  s.algorithm = algorithm;
  if (runs.empty()) return s;
  const std::size_t T = runs.front()->cum_regret.size();
  for (const SeedRun* r : runs) {
    if (r->cum_regret.size() != T) throw InputError("runs of " + algorithm + " differ in length");
  }
  const std::size_t n = runs.size();
  double q = 0.0;
  if (n > 1) {
    boost::math::students_t dist(static_cast<double>(n - 1));
    q = boost::math::quantile(dist, 0.98);
  }
  s.mean.resize(T);
  s.ci_low.resize(T);
  s.ci_high.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    double sum = 0.0;
    for (const SeedRun* r : runs) sum += r->cum_regret[t];
    const double mean = sum / static_cast<double>(n);
    double half = 0.0;
    if (n > 1) {
      double ss = 0.0;
      for (const SeedRun* r : runs) ss += (r->cum_regret[t] - mean) * (r->cum_regret[t] - mean);
      const double sd = std::sqrt(ss / static_cast<double>(n - 1));
      half = q * sd / std::sqrt(static_cast<double>(n));
    }
    s.mean[t] = mean;
    s.ci_low[t] = mean - half;
    s.ci_high[t] = mean + half;
  }
  return s;
}

void require_algorithms(const ExperimentConfig& config) {
  if (config.algorithms.empty()) {
    throw ConfigError("algorithms: at least one algorithm is required");
  }
}

RunResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  require_algorithms(config);
  const auto start = std::chrono::steady_clock::now();
  const auto data = load_environment_data(config.env);
  const std::size_t A = config.algorithms.size();
  const std::size_t n = config.repeats;

  RunResult result;
  result.runs.resize(A * n);
  parallel_for(A * n, config.parallel, [&](std::size_t task) {
    const std::size_t a = task / n;
    const std::size_t i = task % n;
    result.runs[task] = run_single(config.env, data, config.algorithms[a], i, config.base_seed);
  });

  double kappa_sum = 0.0;
  for (std::size_t a = 0; a < A; ++a) {
    std::vector<const SeedRun*> group;
    for (std::size_t i = 0; i < n; ++i) group.push_back(&result.runs[a * n + i]);
    result.summaries.push_back(summarize(config.algorithms[a].label, group));
  }
  for (const SeedRun& r : result.runs) kappa_sum += r.kappa_star;
  result.kappa_star = kappa_sum / static_cast<double>(result.runs.size());
  // Execution knobs do not change results, so serial and parallel runs share a hash.
  nlohmann::json canonical = config_to_json(config);
  canonical.erase("parallel");
  canonical.erase("output");
  result.config_hash = content_hash(canonical.dump());
  result.input_hash = input_hash_of(config.env);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

SweepResult sweep(const ExperimentConfig& config, const SweepGrid& grid) {
  config.validate();
  require_algorithms(config);
  if (grid.nu.empty() || grid.lambda.empty()) throw ConfigError("sweep: grid must not be empty");
  std::vector<double> nus = grid.nu;
  std::vector<double> lambdas = grid.lambda;
  std::sort(nus.begin(), nus.end());
  std::sort(lambdas.begin(), lambdas.end());
  nus.erase(std::unique(nus.begin(), nus.end()), nus.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());

  const std::size_t seeds = grid.repeats > 0 ? grid.repeats : config.repeats;
  const std::uint64_t base = config.base_seed + grid.seed_offset;
  const auto data = load_environment_data(config.env);
  const std::size_t A = config.algorithms.size();
  const std::size_t cells = nus.size() * lambdas.size();

  struct Task {
    std::size_t a, cell, seed;
  };
  std::vector<Task> tasks;
  for (std::size_t a = 0; a < A; ++a)
    for (std::size_t c = 0; c < cells; ++c)
      for (std::size_t s = 0; s < seeds; ++s) tasks.push_back({a, c, s});
  std::vector<double> finals(tasks.size(), 0.0);

  parallel_for(tasks.size(), config.parallel, [&](std::size_t k) {
    const Task& task = tasks[k];
    AlgorithmSpec algo = config.algorithms[task.a];
    algo.bandit.nu = nus[task.cell / lambdas.size()];
    algo.bandit.lambda = lambdas[task.cell % lambdas.size()];
    const SeedRun run = run_single(config.env, data, algo, task.seed, base);
    finals[k] = run.cum_regret.empty() ? 0.0 : run.cum_regret.back();
  });

  SweepResult out;
  for (std::size_t a = 0; a < A; ++a) {
    SweepBest best;
    best.algorithm = config.algorithms[a].label;
    bool have = false;
    for (std::size_t c = 0; c < cells; ++c) {
      double sum = 0.0;
      for (std::size_t s = 0; s < seeds; ++s) sum += finals[(a * cells + c) * seeds + s];
      SweepRow row;
      row.algorithm = best.algorithm;
      row.nu = nus[c / lambdas.size()];
      row.lambda = lambdas[c % lambdas.size()];
      row.final_mean_cum_regret = sum / static_cast<double>(seeds);
      // Cells are visited in (nu, lambda) ascending order, so a strict
      // comparison keeps the smaller pair on ties.
      if (!have || row.final_mean_cum_regret < best.final_mean_cum_regret) {
        best.nu = row.nu;
        best.lambda = row.lambda;
        best.final_mean_cum_regret = row.final_mean_cum_regret;
        have = true;
      }
      out.table.push_back(row);
    }
    out.best.push_back(best);
  }
  return out;
}

ExperimentConfig apply_sweep(const ExperimentConfig& config, const SweepResult& result) {
  ExperimentConfig tuned = config;
  for (auto& algo : tuned.algorithms) {
    for (const auto& b : result.best) {
      if (b.algorithm == algo.label) {
        algo.bandit.nu = b.nu;
        algo.bandit.lambda = b.lambda;
      }
    }
  }
  return tuned;
}

std::filesystem::path per_seed_path(const std::filesystem::path& path) {
  std::filesystem::path out = path;
  out.replace_filename(path.stem().string() + "_per_seed" + path.extension().string());
  return out;
}

void export_csv(const RunResult& result, const std::filesystem::path& path) {
  if (result.summaries.empty()) throw InputError("export_csv: no results");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "# config_hash=" << std::hex << std::setw(16) << std::setfill('0') << result.config_hash
      << '\n'
      << "# input_hash=" << std::setw(16) << result.input_hash << std::dec << std::setfill(' ')
      << '\n';
  out << "round,algorithm,mean_cum_regret,ci_low,ci_high\n";
  for (const auto& s : result.summaries) {
    for (std::size_t t = 0; t < s.mean.size(); ++t) {
      out << t + 1 << ',' << s.algorithm << ',' << format_double(s.mean[t]) << ','
          << format_double(s.ci_low[t]) << ',' << format_double(s.ci_high[t]) << '\n';
    }
  }
  if (!out) throw InputError("failed writing " + path.string());

  const auto seed_path = per_seed_path(path);
  std::ofstream ps(seed_path, std::ios::binary);
  if (!ps) throw InputError("cannot write " + seed_path.string());
  ps << "# config_hash=" << std::hex << std::setw(16) << std::setfill('0') << result.config_hash
     << '\n'
     << "# input_hash=" << std::setw(16) << result.input_hash << std::dec << std::setfill(' ')
     << '\n';
  ps << "round,algorithm,seed,cum_regret\n";
  for (const auto& r : result.runs) {
    for (std::size_t t = 0; t < r.cum_regret.size(); ++t) {
      ps << t + 1 << ',' << r.algorithm << ',' << r.seed << ',' << format_double(r.cum_regret[t])
         << '\n';
    }
  }
  if (!ps) throw InputError("failed writing " + seed_path.string());
}

void export_sweep_csv(const SweepResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "algorithm,nu,lambda,final_mean_cum_regret\n";
  for (const auto& row : result.table) {
    out << row.algorithm << ',' << format_double(row.nu) << ',' << format_double(row.lambda)
        << ',' << format_double(row.final_mean_cum_regret) << '\n';
  }
  if (!out) throw InputError("failed writing " + path.string());
}

std::uint64_t content_hash(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace neurallog
