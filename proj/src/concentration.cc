#include "neurallog/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <string>

#include "neurallog/design_matrix.hpp"
#include "neurallog/errors.hpp"
#include "neurallog/link.hpp"
#include "neurallog/parallel.hpp"

namespace neurallog {

namespace {

template <class T>
T require(const std::optional<T>& v, const char* name, BoundVariant variant) {
  if (!v) {
    throw InputError(std::string("bound_value(") + std::string(bound_variant_name(variant)) +
                     "): missing input '" + name + "'");
  }
  return *v;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace

std::string_view bound_variant_name(BoundVariant variant) {
  switch (variant) {
    case BoundVariant::kTheorem1: return "theorem1";
    case BoundVariant::kHoeffdingKappa: return "hoeffding_kappa";
    case BoundVariant::kFaury: return "faury";
  }
  return "unknown";
}

double bound_value(BoundVariant variant, const BoundInputs& in) {
  if (!(in.delta > 0.0 && in.delta < 1.0)) throw InputError("bound_value: delta must lie in (0,1)");
  switch (variant) {
    case BoundVariant::kTheorem1: {
      if (in.t < 1) throw InputError("bound_value(theorem1): t must be at least 1");
      const double M = require(in.M, "M", variant);
      const double N = require(in.N, "N", variant);
      const double lambda = require(in.lambda, "lambda", variant);
      const double logdet = require(in.logdet_H, "logdet_H", variant);
      const double td = static_cast<double>(in.t);
      const double lg = std::log(4.0 * td * td / in.delta);
      return 8.0 * std::sqrt(std::max(logdet, 0.0) * lg) + 4.0 * M * N / std::sqrt(lambda) * lg;
    }
    case BoundVariant::kHoeffdingKappa: {
      const double M = require(in.M, "M", variant);
      const double kappa = require(in.kappa, "kappa", variant);
      const double logdet = require(in.logdet_V, "logdet_V", variant);
      return M * std::sqrt(kappa * std::max(logdet, 0.0) + 2.0 * kappa * std::log(1.0 / in.delta));
    }
    case BoundVariant::kFaury: {
      const double M = require(in.M, "M", variant);
      const double lambda = require(in.lambda, "lambda", variant);
      const double logdet = require(in.logdet_H, "logdet_H", variant);
      const double L = require(in.L_param, "L_param", variant);
      const double d = static_cast<double>(require(in.dim, "dim", variant));
      const double c = 2.0 * M * L / std::sqrt(lambda);
      return c * (logdet + std::log(1.0 / in.delta) + d * std::log(2.0)) + 1.0 / c;
    }
  }
  throw InputError("bound_value: unknown variant");
}

void MartingaleConfig::validate() const {
  if (dim == 0) throw InputError("martingale: dim must be positive");
  if (horizon < 1) throw InputError("martingale: horizon must be at least 1");
  if (!(lambda > 0.0)) throw InputError("martingale: lambda must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("martingale: delta must lie in (0,1)");
  if (!(M > 0.0) || !(N > 0.0)) throw InputError("martingale: M and N must be positive");
  if (!(theta_norm >= 0.0)) throw InputError("martingale: theta_norm must be non-negative");
}

double MartingaleConfig::kappa() const { return kappa_for_bound(N * theta_norm).kappa; }

MartingaleTrial run_martingale_trial(const MartingaleConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto d = static_cast<Eigen::Index>(cfg.dim);
  MartingaleTrial trial;
  trial.kappa = cfg.kappa();
  trial.x.reserve(cfg.horizon);
  trial.eta.reserve(cfg.horizon);
  trial.Z.reserve(cfg.horizon);
  trial.logdet_H.reserve(cfg.horizon);
  trial.logdet_V.reserve(cfg.horizon);
  trial.bounds.reserve(cfg.horizon);

  Eigen::VectorXd theta_star = Eigen::VectorXd::Zero(d);
  theta_star(0) = cfg.theta_norm;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  ShermanMorrisonInverse h_inv(cfg.dim, cfg.lambda);
  ShermanMorrisonInverse v_inv(cfg.dim, trial.kappa * cfg.lambda);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(d);

  BoundInputs in;
  in.delta = cfg.delta;
  in.M = cfg.M;
  in.N = cfg.N;
  in.lambda = cfg.lambda;
  in.kappa = trial.kappa;
  in.dim = cfg.dim;
  in.L_param = cfg.N;

  for (std::size_t t = 1; t <= cfg.horizon; ++t) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
    switch (cfg.contexts) {
      case ContextMode::kIsotropic: {
        double norm = 0.0;
        do {
          for (Eigen::Index i = 0; i < d; ++i) x(i) = gauss(rng);
          norm = x.norm();
        } while (norm == 0.0);
        x *= cfg.N / norm;
        break;
      }
      case ContextMode::kAligned:
        x(0) = cfg.N;
        break;
      case ContextMode::kZero:
        break;
    }
    const double z = x.dot(theta_star);
    const double p = sigmoid(z);
    const double r = unif(rng) < p ? 1.0 : 0.0;
    const double eta = r - p;

    s += eta * x;
    h_inv.update(x, sigmoid_derivative(z));
    v_inv.update(x, 1.0);

    in.t = t;
    in.logdet_H = h_inv.logdet_ratio();
    in.logdet_V = v_inv.logdet_ratio();
    std::array<double, 3> b{};
    for (std::size_t v = 0; v < kAllBoundVariants.size(); ++v) {
      b[v] = bound_value(kAllBoundVariants[v], in);
    }

    trial.x.push_back(std::move(x));
    trial.eta.push_back(eta);
    trial.Z.push_back(std::sqrt(std::max(h_inv.inv_quadratic(s), 0.0)));
    trial.logdet_H.push_back(*in.logdet_H);
    trial.logdet_V.push_back(*in.logdet_V);
    trial.bounds.push_back(b);
  }
  return trial;
}

ViolationReport violation_report(const MartingaleConfig& cfg, std::size_t trials,
                                 std::uint64_t base_seed, std::size_t threads) {
  if (trials < 100) throw InputError("violation_report: need at least 100 trials");
  cfg.validate();
  ViolationReport report;
  report.config = cfg;
  report.trials = trials;
  report.summaries.resize(trials);

  parallel_for(trials, threads, [&](std::size_t i) {
    const MartingaleTrial trial = run_martingale_trial(cfg, base_seed + i);
    TrialSummary sum;
    sum.trial = i;
    sum.final_Z = trial.Z.back();
    const auto argmax = static_cast<std::size_t>(
        std::max_element(trial.Z.begin(), trial.Z.end()) - trial.Z.begin());
    for (std::size_t v = 0; v < 3; ++v) {
      sum.max_Z[v] = trial.Z[argmax];
      sum.bound_at_max[v] = trial.bounds[argmax][v];
      sum.final_bound[v] = trial.bounds.back()[v];
      double ratio = std::numeric_limits<double>::infinity();
      bool violated = false;
      for (std::size_t t = 0; t < trial.Z.size(); ++t) {
        if (trial.Z[t] > trial.bounds[t][v]) violated = true;
        if (trial.Z[t] > 0.0) ratio = std::min(ratio, trial.bounds[t][v] / trial.Z[t]);
      }
      sum.violated[v] = violated;
      sum.min_ratio[v] = ratio;
    }
    report.summaries[i] = sum;
  });

  const double n = static_cast<double>(trials);
  for (std::size_t v = 0; v < 3; ++v) {
    VariantReport& vr = report.variants[v];
    vr.variant = kAllBoundVariants[v];
    std::vector<double> ratios;
    ratios.reserve(trials);
    double slack = 0.0;
    double final_bound = 0.0;
    for (const auto& s : report.summaries) {
      vr.violations += s.violated[v] ? 1 : 0;
      slack += s.final_bound[v] - s.final_Z;
      final_bound += s.final_bound[v];
      if (std::isfinite(s.min_ratio[v])) ratios.push_back(s.min_ratio[v]);
    }
    vr.violation_rate = static_cast<double>(vr.violations) / n;
    vr.std_error = std::sqrt(vr.violation_rate * (1.0 - vr.violation_rate) / n);
    vr.mean_slack = slack / n;
    vr.mean_final_bound = final_bound / n;
    vr.ratio_quantiles = {quantile(ratios, 0.05), quantile(ratios, 0.5), quantile(ratios, 0.95)};
  }
  return report;
}

void write_violation_csv(const ViolationReport& report, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  os << std::setprecision(10);
  os << "variant,trial,horizon,max_Z,bound_at_max,violated\n";
  for (std::size_t v = 0; v < 3; ++v) {
    for (const auto& s : report.summaries) {
      os << bound_variant_name(kAllBoundVariants[v]) << ',' << s.trial << ','
         << report.config.horizon << ',' << s.max_Z[v] << ',' << s.bound_at_max[v] << ','
         << (s.violated[v] ? 1 : 0) << '\n';
    }
  }
  if (!os) throw InputError("write failed for " + path.string());
}

}  // namespace neurallog
