#include "neurallog/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "neurallog/errors.hpp"
#include "neurallog/link.hpp"

namespace neurallog {

namespace {

enum class Stream : std::uint32_t { kHidden = 1, kArms = 2, kReward = 3, kRows = 4 };

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::uint64_t t = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(t),
                    static_cast<std::uint32_t>(t >> 32)};
  return std::mt19937_64(seq);
}

Eigen::VectorXd random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::VectorXd x(static_cast<Eigen::Index>(dim));
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = unif(rng);
    norm = x.norm();
  } while (norm == 0.0);
  return x / norm;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw InputError("dataset line " + std::to_string(line_no) + ": '" + s +
                     "' is not a finite number");
  }
  return v;
}

}  // namespace

std::string_view env_kind_name(EnvKind kind) {
  switch (kind) {
    case EnvKind::kH1: return "h1";
    case EnvKind::kH2: return "h2";
    case EnvKind::kH3: return "h3";
    case EnvKind::kDataset: return "dataset";
    case EnvKind::kCustom: return "custom";
  }
  return "unknown";
}

EnvKind parse_env_kind(std::string_view name) {
  if (name == "h1") return EnvKind::kH1;
  if (name == "h2") return EnvKind::kH2;
  if (name == "h3") return EnvKind::kH3;
  if (name == "dataset") return EnvKind::kDataset;
  throw ConfigError("env.kind: unknown environment '" + std::string(name) + "'");
}

Eigen::VectorXd symmetrize_context(const Eigen::VectorXd& x,
                                   std::optional<std::size_t> raw_dim) {
  if (raw_dim && static_cast<std::size_t>(x.size()) != *raw_dim) {
    std::ostringstream msg;
    msg << "symmetrize_context: expected a raw context of length " << *raw_dim << ", got "
        << x.size() << " (already symmetrized?)";
    throw InputError(msg.str());
  }
  const double norm = x.norm();
  if (norm == 0.0) throw InputError("symmetrize_context: zero vector");
  Eigen::VectorXd out(2 * x.size());
  const double scale = 1.0 / (std::sqrt(2.0) * norm);
  out.head(x.size()) = scale * x;
  out.tail(x.size()) = scale * x;
  return out;
}

std::size_t RoundData::optimal_arm() const {
  Eigen::Index best = 0;
  probs.maxCoeff(&best);
  return static_cast<std::size_t>(best);
}

Dataset load_dataset_csv(const std::filesystem::path& path, std::size_t num_classes) {
  std::ifstream in(path);
  if (!in) throw InputError("dataset: cannot open " + path.string());
  if (num_classes == 0) throw InputError("dataset: number of classes must be positive");
  std::string line;
  if (!std::getline(in, line)) throw InputError("dataset: empty file " + path.string());
  const auto header = split_csv(line);
  if (header.size() < 2 || header.back() != "label") {
    throw InputError("dataset: header must list feature columns followed by 'label'");
  }
  const std::size_t d = header.size() - 1;

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw InputError("dataset line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(cells.size()));
    }
    std::vector<double> row(d);
    for (std::size_t j = 0; j < d; ++j) row[j] = parse_double(cells[j], line_no);
    const double label = parse_double(cells.back(), line_no);
    if (label != std::floor(label) || label < 0 ||
        label >= static_cast<double>(num_classes)) {
      throw InputError("dataset line " + std::to_string(line_no) + ": label " + cells.back() +
                       " outside [0, " + std::to_string(num_classes) + ")");
    }
    rows.push_back(std::move(row));
    labels.push_back(static_cast<int>(label));
  }
  if (rows.empty()) throw InputError("dataset: no data rows in " + path.string());

  Dataset data;
  data.num_classes = num_classes;
  data.labels = std::move(labels);
  data.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
    auto col = data.features.col(j);
    const double lo = col.minCoeff();
    const double hi = col.maxCoeff();
    if (hi == lo) {
      col.setZero();
    } else {
      col = (2.0 * (col.array() - lo) / (hi - lo) - 1.0).matrix();
    }
  }
  return data;
}

Environment Environment::synthetic(EnvKind kind, std::size_t dim, std::size_t arms,
                                   std::size_t horizon, std::uint64_t seed) {
  if (kind != EnvKind::kH1 && kind != EnvKind::kH2 && kind != EnvKind::kH3) {
    throw ConfigError("Environment::synthetic: kind must be h1, h2 or h3");
  }
  if (dim == 0 || arms == 0 || horizon == 0) {
    throw ConfigError("environment dimension, arm count and horizon must be positive");
  }
  Environment env;
  env.kind_ = kind;
  env.raw_dim_ = dim;
  env.arms_ = arms;
  env.horizon_ = horizon;
  env.seed_ = seed;
  auto rng = make_rng(seed, Stream::kHidden);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const auto n = static_cast<Eigen::Index>(dim);
  if (kind == EnvKind::kH3) {
    env.Theta_.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) env.Theta_(i, j) = unif(rng);
    }
  } else {
    env.theta_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) env.theta_(i) = unif(rng);
  }
  return env;
}

Environment Environment::custom(std::size_t dim, std::size_t arms, std::size_t horizon,
                                std::uint64_t seed, HiddenFunction h) {
  if (dim == 0 || arms == 0 || horizon == 0) {
    throw ConfigError("environment dimension, arm count and horizon must be positive");
  }
  Environment env;
  env.kind_ = EnvKind::kCustom;
  env.raw_dim_ = dim;
  env.arms_ = arms;
  env.horizon_ = horizon;
  env.seed_ = seed;
  env.custom_ = std::move(h);
  return env;
}

Environment Environment::from_dataset(std::shared_ptr<const Dataset> data,
                                      std::size_t horizon, std::uint64_t seed) {
  if (!data || data->features.rows() == 0) throw InputError("dataset is empty");
  if (horizon == 0) throw ConfigError("environment horizon must be positive");
  Environment env;
  env.kind_ = EnvKind::kDataset;
  env.arms_ = data->num_classes;
  env.raw_dim_ = static_cast<std::size_t>(data->features.cols()) * data->num_classes;
  env.horizon_ = horizon;
  env.seed_ = seed;
  env.row_order_.resize(static_cast<std::size_t>(data->features.rows()));
  std::iota(env.row_order_.begin(), env.row_order_.end(), std::size_t{0});
  auto rng = make_rng(seed, Stream::kRows);
  std::shuffle(env.row_order_.begin(), env.row_order_.end(), rng);
  env.data_ = std::move(data);
  return env;
}

double Environment::hidden_logit(const Eigen::VectorXd& raw) const {
  switch (kind_) {
    case EnvKind::kH1: {
      const double z = raw.dot(theta_);
      return 0.2 * z * z * z * z;
    }
    case EnvKind::kH2:
      return 20.0 * std::cos(raw.dot(theta_));
    case EnvKind::kH3:
      return 5.0 * raw.dot(Theta_ * raw);
    case EnvKind::kCustom:
      return custom_(raw);
    case EnvKind::kDataset:
      break;
  }
  return 0.0;
}

RoundData Environment::round(std::size_t t) const {
  if (t < 1 || t > horizon_) {
    std::ostringstream msg;
    msg << "env_round: round " << t << " outside [1, " << horizon_ << "]";
    throw InputError(msg.str());
  }
  RoundData rd;
  rd.t = t;
  const auto K = static_cast<Eigen::Index>(arms_);
  const auto d = static_cast<Eigen::Index>(raw_dim_);
  rd.raw = Eigen::MatrixXd::Zero(d, K);
  rd.contexts.resize(2 * d, K);
  rd.logits.resize(K);
  rd.probs.resize(K);

  if (kind_ == EnvKind::kDataset) {
    const std::size_t row = row_order_[(t - 1) % row_order_.size()];
    const auto features = data_->features.row(static_cast<Eigen::Index>(row));
    const Eigen::Index block = features.size();
    const int label = data_->labels[row];
    for (Eigen::Index k = 0; k < K; ++k) {
      rd.raw.col(k).segment(k * block, block) = features.transpose();
      const bool correct = k == label;
      rd.probs(k) = correct ? 1.0 : 0.0;
      rd.logits(k) = correct ? std::numeric_limits<double>::infinity()
                             : -std::numeric_limits<double>::infinity();
      // An all-zero feature row would have no direction; leave it at zero.
      if (features.squaredNorm() > 0.0) {
        rd.contexts.col(k) = symmetrize_context(rd.raw.col(k));
      } else {
        rd.contexts.col(k).setZero();
      }
    }
  } else {
    auto rng = make_rng(seed_, Stream::kArms, t);
    for (Eigen::Index k = 0; k < K; ++k) {
      rd.raw.col(k) = random_unit(rng, raw_dim_);
      rd.logits(k) = hidden_logit(rd.raw.col(k));
      rd.probs(k) = sigmoid(rd.logits(k));
      rd.contexts.col(k) = symmetrize_context(rd.raw.col(k));
    }
  }
  auto reward_rng = make_rng(seed_, Stream::kReward, t);
  rd.uniform = std::uniform_real_distribution<double>(0.0, 1.0)(reward_rng);
  return rd;
}

int Environment::sample_reward(const RoundData& round, std::size_t arm) const {
  if (arm >= static_cast<std::size_t>(round.probs.size())) {
    throw InputError("sample_reward: arm index out of range");
  }
  return round.uniform < round.probs(static_cast<Eigen::Index>(arm)) ? 1 : 0;
}

double Environment::regret_of(const RoundData& round, std::size_t chosen) {
  if (chosen >= static_cast<std::size_t>(round.probs.size())) {
    throw InputError("regret_of: arm index out of range");
  }
  const std::size_t best = round.optimal_arm();
  optimal_dmu_sum_ += sigmoid_derivative(round.logits(static_cast<Eigen::Index>(best)));
  ++accounted_rounds_;
  const double regret = round.probs(static_cast<Eigen::Index>(best)) -
                        round.probs(static_cast<Eigen::Index>(chosen));
  return std::clamp(regret, 0.0, 1.0);
}

double Environment::kappa_star() const {
  if (optimal_dmu_sum_ <= 0.0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(accounted_rounds_) / optimal_dmu_sum_;
}

double Environment::max_abs_logit() const {
  double out = 0.0;
  for (std::size_t t = 1; t <= horizon_; ++t) {
    out = std::max(out, round(t).logits.cwiseAbs().maxCoeff());
  }
  return out;
}

}  // namespace neurallog
