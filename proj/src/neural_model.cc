#include "neurallog/neural_model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "neurallog/errors.hpp"
#include "neurallog/float_env.hpp"
#include "neurallog/link.hpp"

namespace neurallog {

namespace {

constexpr double kLogClamp = 1e-12;

void check_dim(const NetworkParams& params, Eigen::Index n, const char* where) {
  if (static_cast<std::size_t>(n) != params.input_dim()) {
    std::ostringstream msg;
    msg << where << ": input has dimension " << n << ", network expects "
        << params.input_dim();
    throw InputError(msg.str());
  }
}

double clamped_nll(double f, double r) {
  const double mu = std::clamp(sigmoid(f), kLogClamp, 1.0 - kLogClamp);
  return -(r * std::log(mu) + (1.0 - r) * std::log(1.0 - mu));
}

// Forward pass over a batch, keeping the pre-activations for backprop.
struct BatchPass {
  std::vector<Eigen::MatrixXd> pre;   // Z_1 .. Z_{L-1}
  std::vector<Eigen::MatrixXd> post;  // relu(Z_l)
  Eigen::RowVectorXd out;             // f over the batch
};

BatchPass run_batch(const NetworkParams& params,
                    const Eigen::Ref<const Eigen::MatrixXd>& contexts) {
  const std::size_t hidden = params.depth() - 1;
  BatchPass pass;
  pass.pre.resize(hidden);
  pass.post.resize(hidden);
  for (std::size_t l = 0; l < hidden; ++l) {
    if (l == 0) {
      pass.pre[l].noalias() = params.layer(0) * contexts;
    } else {
      pass.pre[l].noalias() = params.layer(l) * pass.post[l - 1];
    }
    pass.post[l] = pass.pre[l].cwiseMax(0.0);
  }
  const double scale = std::sqrt(static_cast<double>(params.width()));
  pass.out.noalias() = scale * (params.layer(hidden) * pass.post[hidden - 1]);
  return pass;
}

void write_u32(std::ostream& os, std::uint32_t v) {
  std::array<unsigned char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b.data()), b.size());
}

void write_u64(std::ostream& os, std::uint64_t v) {
  std::array<unsigned char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b.data()), b.size());
}

std::uint64_t read_u64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  is.read(reinterpret_cast<char*>(b.data()), b.size());
  if (!is) throw InputError("snapshot: truncated file");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint32_t read_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  is.read(reinterpret_cast<char*>(b.data()), b.size());
  if (!is) throw InputError("snapshot: truncated file");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

constexpr std::array<char, 4> kSnapshotMagic = {'N', 'L', 'N', 'P'};
constexpr std::uint32_t kSnapshotVersion = 1;

}  // namespace

NetworkParams::NetworkParams(std::size_t input_dim, std::size_t width,
                             std::size_t depth)
    : input_dim_(input_dim), width_(width), depth_(depth) {
  if (depth < 2) throw ConfigError("network depth L must be at least 2");
  if (input_dim == 0 || width == 0) {
    throw ConfigError("network input dimension and width must be positive");
  }
  offsets_.resize(depth + 1);
  offsets_[0] = 0;
  for (std::size_t l = 0; l < depth; ++l) {
    offsets_[l + 1] = offsets_[l] + layer_rows(l) * layer_cols(l);
  }
  theta_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(offsets_[depth]));
}

NetworkParams NetworkParams::unflatten(std::size_t input_dim, std::size_t width,
                                       std::size_t depth,
                                       const Eigen::VectorXd& flat) {
  NetworkParams params(input_dim, width, depth);
  if (static_cast<std::size_t>(flat.size()) != params.size()) {
    std::ostringstream msg;
    msg << "unflatten: expected " << params.size() << " parameters, got "
        << flat.size();
    throw InputError(msg.str());
  }
  params.theta_ = flat;
  return params;
}

std::size_t NetworkParams::layer_rows(std::size_t l) const {
  return l + 1 == depth_ ? 1 : width_;
}

std::size_t NetworkParams::layer_cols(std::size_t l) const {
  return l == 0 ? input_dim_ : width_;
}

Eigen::Map<Eigen::MatrixXd> NetworkParams::layer(std::size_t l) {
  return {theta_.data() + offsets_[l], static_cast<Eigen::Index>(layer_rows(l)),
          static_cast<Eigen::Index>(layer_cols(l))};
}

Eigen::Map<const Eigen::MatrixXd> NetworkParams::layer(std::size_t l) const {
  return {theta_.data() + offsets_[l], static_cast<Eigen::Index>(layer_rows(l)),
          static_cast<Eigen::Index>(layer_cols(l))};
}

bool NetworkParams::operator==(const NetworkParams& other) const {
  return input_dim_ == other.input_dim_ && width_ == other.width_ &&
         depth_ == other.depth_ && theta_.size() == other.theta_.size() &&
         theta_ == other.theta_;
}

ObservationSet ObservationSet::from(std::span<const Observation> obs) {
  ObservationSet set(obs.empty() ? 0 : static_cast<std::size_t>(obs[0].x.size()));
  for (const auto& o : obs) set.append(o.x, o.r);
  return set;
}

void ObservationSet::append(const Eigen::VectorXd& x, int r) {
  if (r != 0 && r != 1) throw InputError("observation reward must be 0 or 1");
  if (dim_ == 0 && count_ == 0) dim_ = static_cast<std::size_t>(x.size());
  if (static_cast<std::size_t>(x.size()) != dim_) {
    throw InputError("observation context has the wrong dimension");
  }
  if (count_ == static_cast<std::size_t>(contexts_.cols())) {
    const Eigen::Index cap = std::max<Eigen::Index>(16, 2 * contexts_.cols());
    contexts_.conservativeResize(static_cast<Eigen::Index>(dim_), cap);
    rewards_.conservativeResize(cap);
  }
  contexts_.col(static_cast<Eigen::Index>(count_)) = x;
  rewards_(static_cast<Eigen::Index>(count_)) = r;
  ++count_;
}

Observation ObservationSet::at(std::size_t i) const {
  return {contexts_.col(static_cast<Eigen::Index>(i)),
          static_cast<int>(rewards_(static_cast<Eigen::Index>(i)))};
}

NetworkParams init_network(std::size_t input_dim, std::size_t width,
                           std::size_t depth, std::uint64_t seed) {
  if (width % 2 != 0) throw ConfigError("network width m must be even");
  if (input_dim % 2 != 0) {
    throw ConfigError("input dimension must be even (symmetrized contexts)");
  }
  NetworkParams params(input_dim, width, depth);
  std::mt19937_64 rng(seed);
  const double m = static_cast<double>(width);
  std::normal_distribution<double> hidden(0.0, std::sqrt(4.0 / m));
  std::normal_distribution<double> output(0.0, std::sqrt(2.0 / m));

  const Eigen::Index half_rows = static_cast<Eigen::Index>(width / 2);
  for (std::size_t l = 0; l + 1 < depth; ++l) {
    auto w = params.layer(l);
    const Eigen::Index half_cols = w.cols() / 2;
    Eigen::MatrixXd block(half_rows, half_cols);
    for (Eigen::Index j = 0; j < half_cols; ++j) {
      for (Eigen::Index i = 0; i < half_rows; ++i) block(i, j) = hidden(rng);
    }
    w.setZero();
    w.topLeftCorner(half_rows, half_cols) = block;
    w.bottomRightCorner(half_rows, half_cols) = block;
  }
  auto last = params.layer(depth - 1);
  for (Eigen::Index j = 0; j < half_rows; ++j) {
    const double v = output(rng);
    last(0, j) = v;
    last(0, j + half_rows) = -v;
  }
  return params;
}

double forward(const NetworkParams& params, const Eigen::VectorXd& x) {
  check_dim(params, x.size(), "forward");
  Eigen::VectorXd a = (params.layer(0) * x).cwiseMax(0.0);
  for (std::size_t l = 1; l + 1 < params.depth(); ++l) {
    a = (params.layer(l) * a).cwiseMax(0.0);
  }
  const double scale = std::sqrt(static_cast<double>(params.width()));
  return scale * (params.layer(params.depth() - 1) * a)(0, 0);
}

double forward_and_gradient(const NetworkParams& params, const Eigen::VectorXd& x,
                            Eigen::VectorXd& grad) {
  check_dim(params, x.size(), "gradient");
  const std::size_t hidden = params.depth() - 1;
  std::vector<Eigen::VectorXd> pre(hidden);
  std::vector<Eigen::VectorXd> post(hidden);
  for (std::size_t l = 0; l < hidden; ++l) {
    pre[l] = l == 0 ? Eigen::VectorXd(params.layer(0) * x)
                    : Eigen::VectorXd(params.layer(l) * post[l - 1]);
    post[l] = pre[l].cwiseMax(0.0);
  }
  const double scale = std::sqrt(static_cast<double>(params.width()));
  const auto w_out = params.layer(hidden);
  const double f = scale * w_out.row(0).dot(post[hidden - 1]);

  grad.resize(static_cast<Eigen::Index>(params.size()));
  auto grad_layer = [&](std::size_t l) {
    return Eigen::Map<Eigen::MatrixXd>(
        grad.data() + params.layer_offset(l),
        static_cast<Eigen::Index>(params.layer_rows(l)),
        static_cast<Eigen::Index>(params.layer_cols(l)));
  };
  grad_layer(hidden) = scale * post[hidden - 1].transpose();
  Eigen::VectorXd back =
      (scale * w_out.row(0).transpose()).cwiseProduct(
          (pre[hidden - 1].array() > 0.0).cast<double>().matrix());
  for (std::size_t l = hidden; l-- > 0;) {
    if (l == 0) {
      grad_layer(0).noalias() = back * x.transpose();
    } else {
      grad_layer(l).noalias() = back * post[l - 1].transpose();
      back = (params.layer(l).transpose() * back)
                 .cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return f;
}

Eigen::VectorXd gradient(const NetworkParams& params, const Eigen::VectorXd& x) {
  Eigen::VectorXd grad;
  forward_and_gradient(params, x, grad);
  return grad;
}

Eigen::VectorXd forward_batch(const NetworkParams& params,
                              const Eigen::Ref<const Eigen::MatrixXd>& contexts) {
  check_dim(params, contexts.rows(), "forward_batch");
  return run_batch(params, contexts).out.transpose();
}

double loss_value(const NetworkParams& theta, const ObservationSet& obs,
                  double lambda, const NetworkParams& theta0, TrainMode mode) {
  if (theta.size() != theta0.size()) {
    throw InputError("loss_value: theta and theta0 differ in shape");
  }
  double nll = 0.0;
  if (!obs.empty()) {
    check_dim(theta, obs.contexts().rows(), "loss_value");
    const Eigen::RowVectorXd f = run_batch(theta, obs.contexts()).out;
    const auto r = obs.rewards();
    for (Eigen::Index i = 0; i < f.size(); ++i) nll += clamped_nll(f(i), r(i));
  }
  if (mode == TrainMode::kTheory) {
    const double m = static_cast<double>(theta.width());
    return nll + 0.5 * m * lambda * (theta.flat() - theta0.flat()).squaredNorm();
  }
  return nll + lambda * theta.flat().squaredNorm();
}

Eigen::VectorXd loss_gradient(const NetworkParams& theta, const ObservationSet& obs,
                              const NetworkParams& theta0, const TrainOptions& options,
                              double* objective) {
  const double m = static_cast<double>(theta.width());
  const double scale =
      options.average_loss && !obs.empty() ? 1.0 / static_cast<double>(obs.size())
                                           : 1.0;
  Eigen::VectorXd grad;
  double reg_value = 0.0;
  if (options.mode == TrainMode::kTheory) {
    const Eigen::VectorXd diff = theta.flat() - theta0.flat();
    grad = (scale * m * options.lambda) * diff;
    reg_value = 0.5 * m * options.lambda * diff.squaredNorm();
  } else {
    grad = (scale * 2.0 * options.lambda) * theta.flat();
    reg_value = options.lambda * theta.flat().squaredNorm();
  }

  double nll = 0.0;
  if (!obs.empty()) {
    const auto contexts = obs.contexts();
    check_dim(theta, contexts.rows(), "train_nn");
    const BatchPass pass = run_batch(theta, contexts);
    const auto r = obs.rewards();
    const Eigen::Index n = pass.out.size();
    Eigen::RowVectorXd residual(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      nll += clamped_nll(pass.out(i), r(i));
      residual(i) = sigmoid(pass.out(i)) - r(i);
    }
    const std::size_t hidden = theta.depth() - 1;
    auto grad_layer = [&](std::size_t l) {
      return Eigen::Map<Eigen::MatrixXd>(
          grad.data() + theta.layer_offset(l),
          static_cast<Eigen::Index>(theta.layer_rows(l)),
          static_cast<Eigen::Index>(theta.layer_cols(l)));
    };
    const Eigen::RowVectorXd delta = (scale * std::sqrt(m)) * residual;
    grad_layer(hidden).noalias() += delta * pass.post[hidden - 1].transpose();
    Eigen::MatrixXd back =
        (theta.layer(hidden).transpose() * delta)
            .cwiseProduct((pass.pre[hidden - 1].array() > 0.0).cast<double>().matrix());
    for (std::size_t l = hidden; l-- > 0;) {
      if (l == 0) {
        grad_layer(0).noalias() += back * contexts.transpose();
      } else {
        grad_layer(l).noalias() += back * pass.post[l - 1].transpose();
        back = (theta.layer(l).transpose() * back)
                   .cwiseProduct((pass.pre[l - 1].array() > 0.0).cast<double>().matrix());
      }
    }
  }
  if (objective != nullptr) *objective = scale * (nll + reg_value);
  return grad;
}

TrainResult train_nn(const ObservationSet& obs, const NetworkParams& theta0,
                     const NetworkParams& warm, const TrainOptions& options) {
  if (!(options.step_size > 0.0)) throw ConfigError("train_nn: step size must be positive");
  if (!(options.lambda >= 0.0)) throw ConfigError("train_nn: lambda must be non-negative");
  if (warm.size() != theta0.size()) {
    throw InputError("train_nn: warm start and theta0 differ in shape");
  }
  const FlushDenormals flush;
  TrainResult result{warm, {}};
  result.loss_trajectory.reserve(options.iterations + 1);
  for (std::size_t j = 0; j <= options.iterations; ++j) {
    double objective = 0.0;
    const Eigen::VectorXd grad =
        loss_gradient(result.params, obs, theta0, options, &objective);
    if (!std::isfinite(objective) || !grad.allFinite()) {
      std::ostringstream msg;
      msg << "train_nn: non-finite loss at gradient step " << j;
      throw DivergenceError(msg.str(), j);
    }
    result.loss_trajectory.push_back(objective);
    if (j == options.iterations) break;
    result.params.flat() -= options.step_size * grad;
  }
  return result;
}

void save_snapshot(const std::filesystem::path& path, const NetworkParams& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("snapshot: cannot open " + path.string() + " for writing");
  os.write(kSnapshotMagic.data(), kSnapshotMagic.size());
  write_u32(os, kSnapshotVersion);
  write_u64(os, params.input_dim());
  write_u64(os, params.width());
  write_u64(os, params.depth());
  for (Eigen::Index i = 0; i < params.flat().size(); ++i) {
    write_u64(os, std::bit_cast<std::uint64_t>(params.flat()(i)));
  }
  if (!os) throw InputError("snapshot: write failed for " + path.string());
}

NetworkParams load_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("snapshot: cannot open " + path.string());
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kSnapshotMagic) throw InputError("snapshot: bad magic");
  if (read_u32(is) != kSnapshotVersion) throw InputError("snapshot: unsupported version");
  const std::uint64_t d = read_u64(is);
  const std::uint64_t m = read_u64(is);
  const std::uint64_t L = read_u64(is);
  NetworkParams params(d, m, L);
  for (Eigen::Index i = 0; i < params.flat().size(); ++i) {
    params.flat()(i) = std::bit_cast<double>(read_u64(is));
  }
  return params;
}

}  // namespace neurallog
