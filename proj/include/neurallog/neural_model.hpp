#pragma once

// Fully connected ReLU network f(x; theta) = sqrt(m) W_L relu(... relu(W_1 x)),
// its parameter gradient, and the full-batch gradient-descent trainer.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace neurallog {

enum class TrainMode {
  kTheory,     // (1/2) m lambda ||theta - theta0||^2 regularizer
  kPractical,  // lambda ||theta||^2 regularizer
};

// Parameters stored as one flat vector; layer l is a column-major view so the
// flat layout is [vec(W_1); ...; vec(W_L)].
class NetworkParams {
 public:
  NetworkParams() = default;
  // Zero parameters. Throws ConfigError for depth < 2 or zero sizes.
  NetworkParams(std::size_t input_dim, std::size_t width, std::size_t depth);

  static NetworkParams unflatten(std::size_t input_dim, std::size_t width,
                                 std::size_t depth, const Eigen::VectorXd& flat);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t width() const { return width_; }
  std::size_t depth() const { return depth_; }
  // Parameter count m*d + m^2*(L-2) + m.
  std::size_t size() const { return static_cast<std::size_t>(theta_.size()); }

  std::size_t layer_rows(std::size_t l) const;
  std::size_t layer_cols(std::size_t l) const;
  std::size_t layer_offset(std::size_t l) const { return offsets_[l]; }

  // 0-based: layer(0) is W_1 (m x d), layer(depth-1) is W_L (1 x m).
  Eigen::Map<Eigen::MatrixXd> layer(std::size_t l);
  Eigen::Map<const Eigen::MatrixXd> layer(std::size_t l) const;

  const Eigen::VectorXd& flat() const { return theta_; }
  Eigen::VectorXd& flat() { return theta_; }

  bool operator==(const NetworkParams& other) const;

 private:
  std::size_t input_dim_ = 0;
  std::size_t width_ = 0;
  std::size_t depth_ = 0;
  std::vector<std::size_t> offsets_;
  Eigen::VectorXd theta_;
};

struct Observation {
  Eigen::VectorXd x;
  int r = 0;
};

// Column-major store of observed contexts with amortized appends; the
// trainer reads it as one d x n matrix.
class ObservationSet {
 public:
  explicit ObservationSet(std::size_t dim = 0) : dim_(dim) {}
  static ObservationSet from(std::span<const Observation> obs);

  // Throws InputError for a wrong dimension or r outside {0,1}.
  void append(const Eigen::VectorXd& x, int r);

  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  std::size_t dim() const { return dim_; }
  auto contexts() const { return contexts_.leftCols(count_); }
  auto rewards() const { return rewards_.head(count_); }
  Observation at(std::size_t i) const;

 private:
  std::size_t dim_;
  std::size_t count_ = 0;
  Eigen::MatrixXd contexts_;
  Eigen::VectorXd rewards_;
};

// Block-symmetric initialization: hidden layers [[W,0],[0,W]] with entries
// N(0, 4/m), output [w, -w] with entries N(0, 2/m). f(x; theta0) = 0 for every
// x whose two halves coincide. Throws ConfigError for odd m or odd d.
NetworkParams init_network(std::size_t input_dim, std::size_t width,
                           std::size_t depth, std::uint64_t seed);

double forward(const NetworkParams& params, const Eigen::VectorXd& x);

// Exact backprop gradient with respect to the flat parameters. The ReLU
// derivative at 0 is taken to be 0.
Eigen::VectorXd gradient(const NetworkParams& params, const Eigen::VectorXd& x);

// One pass computing both; `grad` is resized to params.size().
double forward_and_gradient(const NetworkParams& params, const Eigen::VectorXd& x,
                            Eigen::VectorXd& grad);

// Outputs for every column of `contexts`.
Eigen::VectorXd forward_batch(const NetworkParams& params,
                              const Eigen::Ref<const Eigen::MatrixXd>& contexts);

double loss_value(const NetworkParams& theta, const ObservationSet& obs,
                  double lambda, const NetworkParams& theta0, TrainMode mode);

struct TrainOptions {
  double lambda = 1.0;
  double step_size = 0.01;
  std::size_t iterations = 100;
  TrainMode mode = TrainMode::kTheory;
  // Descend on loss / n instead of the summed loss (step size eta / n on the
  // same objective). Keeps a fixed eta stable as the history grows.
  bool average_loss = false;
};

struct TrainResult {
  NetworkParams params;
  // Objective before the first step, then after each step (iterations + 1).
  std::vector<double> loss_trajectory;
};

// `iterations` full-batch gradient steps from `warm`. Throws DivergenceError
// if the objective becomes non-finite.
TrainResult train_nn(const ObservationSet& obs, const NetworkParams& theta0,
                     const NetworkParams& warm, const TrainOptions& options);

// Gradient of the (optionally averaged) training objective at theta.
Eigen::VectorXd loss_gradient(const NetworkParams& theta, const ObservationSet& obs,
                              const NetworkParams& theta0, const TrainOptions& options,
                              double* objective = nullptr);

// Binary snapshot: magic "NLNP", u32 version, u64 d, m, L, then p float64,
// all little-endian.
void save_snapshot(const std::filesystem::path& path, const NetworkParams& params);
NetworkParams load_snapshot(const std::filesystem::path& path);

}  // namespace neurallog
