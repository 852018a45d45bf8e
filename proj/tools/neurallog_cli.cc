// neurallog: run bandit experiments, grid searches, the concentration bound
// Monte Carlo check and small NTK norm computations.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "neurallog/concentration.hpp"
#include "neurallog/config.hpp"
#include "neurallog/environment.hpp"
#include "neurallog/errors.hpp"
#include "neurallog/experiment.hpp"
#include "neurallog/ntk.hpp"

namespace {

using namespace neurallog;

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::size_t> seeds;
  std::optional<std::size_t> parallel;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_config) {
  auto* opt = cmd->add_option("--config", f.config, "JSON config file");
  if (needs_config) opt->required();
  cmd->add_option("--out", f.out, "output CSV path");
  cmd->add_option("--seeds", f.seeds, "number of seeds (overrides repeats)");
  cmd->add_option("--parallel", f.parallel, "worker threads");
}

ExperimentConfig load_with_overrides(const CommonFlags& f) {
  ExperimentConfig cfg = load_config(f.config);
  if (f.seeds) cfg.repeats = *f.seeds;
  if (f.parallel) cfg.parallel = *f.parallel;
  if (!f.out.empty()) cfg.output = f.out;
  cfg.validate();
  return cfg;
}

void print_summaries(const RunResult& result) {
  std::cout << std::setprecision(6);
  for (const auto& s : result.summaries) {
    const std::size_t T = s.mean.size();
    std::cout << s.algorithm << ": final mean cumulative regret " << s.final_mean() << " [";
    std::cout << (T ? s.ci_low.back() : 0.0) << ", " << (T ? s.ci_high.back() : 0.0) << "]";
    double wall = 0.0;
    std::size_t n = 0;
    for (const auto& r : result.runs) {
      if (r.algorithm == s.algorithm) {
        wall += r.wall_seconds;
        ++n;
      }
    }
    std::cout << ", " << (n ? wall / static_cast<double>(n) : 0.0) << " s per seed\n";
  }
  std::cout << "kappa* " << result.kappa_star << ", wall " << result.wall_seconds << " s\n";
}

int cmd_run(const CommonFlags& f) {
  const ExperimentConfig cfg = load_with_overrides(f);
  const RunResult result = run_experiment(cfg);
  export_csv(result, cfg.output);
  print_summaries(result);
  std::cout << "wrote " << cfg.output << " and " << per_seed_path(cfg.output).string() << '\n';
  return 0;
}

int cmd_sweep(const CommonFlags& f, std::optional<std::size_t> sweep_seeds, bool evaluate) {
  ExperimentConfig cfg = load_with_overrides(f);
  SweepGrid grid = cfg.sweep;
  if (sweep_seeds) grid.repeats = *sweep_seeds;
  const SweepResult result = sweep(cfg, grid);
  const std::filesystem::path out = f.out.empty() ? "sweep.csv" : f.out;
  const std::filesystem::path table =
      evaluate ? out.parent_path() / (out.stem().string() + "_sweep.csv") : out;
  export_sweep_csv(result, table);
  for (const auto& b : result.best) {
    std::cout << b.algorithm << ": nu=" << b.nu << " lambda=" << b.lambda
              << " final mean cumulative regret " << b.final_mean_cum_regret << '\n';
  }
  std::cout << "wrote " << table.string() << '\n';
  if (evaluate) {
    ExperimentConfig tuned = apply_sweep(cfg, result);
    tuned.output = out.string();
    const RunResult run = run_experiment(tuned);
    export_csv(run, tuned.output);
    print_summaries(run);
    std::cout << "wrote " << tuned.output << '\n';
  }
  return 0;
}

int cmd_validate_bound(const CommonFlags& f, std::optional<std::size_t> trials) {
  ExperimentConfig cfg;
  if (!f.config.empty()) cfg = load_config(f.config);
  if (f.parallel) cfg.parallel = *f.parallel;
  const std::size_t n = trials ? *trials : (f.seeds ? *f.seeds : cfg.bound_trials);
  const ViolationReport report = violation_report(cfg.bound, n, cfg.base_seed, cfg.parallel);
  const std::filesystem::path out = f.out.empty() ? "violations.csv" : f.out;
  write_violation_csv(report, out);
  std::cout << "d=" << cfg.bound.dim << " horizon=" << cfg.bound.horizon
            << " kappa=" << cfg.bound.kappa() << " trials=" << n << '\n';
  for (const auto& v : report.variants) {
    std::cout << bound_variant_name(v.variant) << ": violation rate " << v.violation_rate
              << " (se " << v.std_error << "), mean final bound " << v.mean_final_bound
              << ", mean slack " << v.mean_slack << '\n';
  }
  std::cout << "wrote " << out.string() << '\n';
  return 0;
}

// Contexts CSV: header, raw feature columns and a final `h` column.
void read_contexts_csv(const std::string& path, Eigen::MatrixXd& contexts, Eigen::VectorXd& h) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw InputError(path + ": empty file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header.back() != "h") {
    throw InputError(path + ": header must end with an 'h' column");
  }
  const std::size_t d = header.size() - 1;
  std::vector<Eigen::VectorXd> cols;
  std::vector<double> values;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        cells.push_back(std::stod(cell, &used));
        if (used != cell.size() && cell.find_first_not_of(" \r", used) != std::string::npos) {
          throw std::invalid_argument(cell);
        }
      } catch (const std::exception&) {
        throw InputError(path + ": row " + std::to_string(row) + " has a non-numeric cell");
      }
    }
    if (cells.size() != d + 1) {
      throw InputError(path + ": row " + std::to_string(row) + " has the wrong column count");
    }
    Eigen::VectorXd x(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) x[static_cast<Eigen::Index>(i)] = cells[i];
    cols.push_back(symmetrize_context(x));
    values.push_back(cells.back());
  }
  if (cols.empty()) throw InputError(path + ": no contexts");
  contexts.resize(static_cast<Eigen::Index>(2 * d), static_cast<Eigen::Index>(cols.size()));
  h.resize(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    contexts.col(static_cast<Eigen::Index>(j)) = cols[j];
    h[static_cast<Eigen::Index>(j)] = values[j];
  }
}

int cmd_ntk(const std::string& contexts_path, std::size_t random_n, std::size_t dim,
            std::uint64_t seed, std::size_t depth, const std::string& function,
            const std::string& out) {
  Eigen::MatrixXd contexts;
  Eigen::VectorXd h;
  if (!contexts_path.empty()) {
    read_contexts_csv(contexts_path, contexts, h);
  } else {
    if (random_n == 0) throw ConfigError("ntk: pass --contexts or --random");
    const EnvKind kind = parse_env_kind(function);
    if (kind == EnvKind::kDataset || kind == EnvKind::kCustom) {
      throw ConfigError("--function: expected h1, h2 or h3");
    }
    const Environment env = Environment::synthetic(kind, dim, random_n, 1, seed);
    const RoundData rd = env.round(1);
    contexts = rd.contexts;
    h = rd.logits;
  }
  const NtkMatrix ntk = ntk_matrix(contexts, depth);
  nlohmann::json j;
  j["contexts"] = contexts.cols();
  j["depth"] = depth;
  j["lambda_min"] = ntk.lambda_min;
  j["singular"] = ntk.singular;
  if (ntk.singular) {
    j["S"] = nullptr;
  } else {
    j["S"] = norm_param_S(h, ntk);
  }
  const std::string text = j.dump(2);
  if (out.empty()) {
    std::cout << text << '\n';
  } else {
    std::ofstream f(out);
    if (!f) throw InputError("cannot write " + out);
    f << text << '\n';
  }
  if (ntk.singular) {
    std::cerr << "NTK matrix is singular: contexts contain parallel or duplicate vectors\n";
    return kExitRuntime;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural logistic bandit experiments"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags, bound_flags;
  auto* run = app.add_subcommand("run", "run every algorithm over every seed");
  add_common(run, run_flags, true);

  auto* sw = app.add_subcommand("sweep", "grid search over (nu, lambda)");
  add_common(sw, sweep_flags, true);
  std::optional<std::size_t> sweep_seeds;
  bool evaluate = false;
  sw->add_option("--sweep-seeds", sweep_seeds, "seeds per grid cell");
  sw->add_flag("--evaluate", evaluate, "rerun the best pairs on the evaluation seeds");

  auto* vb = app.add_subcommand("validate-bound", "Monte Carlo check of the martingale bounds");
  add_common(vb, bound_flags, false);
  std::optional<std::size_t> trials;
  vb->add_option("--trials", trials, "number of trials");

  auto* nt = app.add_subcommand("ntk", "NTK Gram matrix and the norm parameter S");
  std::string contexts_path, function = "h1", ntk_out;
  std::size_t random_n = 0, dim = 5, depth = 2;
  std::uint64_t seed = 1;
  nt->add_option("--contexts", contexts_path, "CSV of raw contexts with a final h column");
  nt->add_option("--random", random_n, "number of random contexts");
  nt->add_option("--dim", dim, "raw context dimension for --random");
  nt->add_option("--seed", seed, "seed for --random");
  nt->add_option("--function", function, "hidden function for --random (h1, h2, h3)");
  nt->add_option("--depth", depth, "network depth L");
  nt->add_option("--out", ntk_out, "write the JSON result here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*sw) return cmd_sweep(sweep_flags, sweep_seeds, evaluate);
    if (*vb) return cmd_validate_bound(bound_flags, trials);
    if (*nt) return cmd_ntk(contexts_path, random_n, dim, seed, depth, function, ntk_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
