#pragma once

// Weighted Gram accumulations  sum_i w_i v_i v_i^T  with the ridge term added
// at query time, so a growing regularizer never forces a rebuild.

#include <cstddef>
#include <cstdint>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace neurallog {

enum class MatrixMode { kFull, kDiag };

class DesignMatrix {
 public:
  DesignMatrix() = default;
  DesignMatrix(std::size_t dim, MatrixMode mode);

  // gram += w v v^T (full) or w (v .* v) (diag). Throws InputError for w < 0
  // or a dimension mismatch.
  void update(const Eigen::VectorXd& v, double w);

  // sqrt(v^T (gram + reg I)^{-1} v). Uses the cached factorization when it was
  // prepared for the current contents and `reg`, otherwise factorizes locally.
  double inv_norm(const Eigen::VectorXd& v, double reg) const;

  // Caches the Cholesky factor of gram + reg I (full mode; no-op in diag).
  void prepare(double reg);

  // log det(scale * gram + I).
  double logdet_ratio(double scale) const;

  std::size_t dim() const { return dim_; }
  std::size_t count() const { return count_; }
  MatrixMode mode() const { return mode_; }
  // Full-mode accumulation; empty in diag mode.
  const Eigen::MatrixXd& gram() const { return gram_; }
  // Diagonal of the accumulation (valid in both modes).
  Eigen::VectorXd diagonal() const;
  // Number of factorizations that needed diagonal jitter.
  std::size_t jitter_events() const { return jitter_events_; }

 private:
  Eigen::LLT<Eigen::MatrixXd> factorize(double reg, std::size_t* jitter) const;

  std::size_t dim_ = 0;
  MatrixMode mode_ = MatrixMode::kDiag;
  std::size_t count_ = 0;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd diag_;

  struct Cache {
    std::size_t count;
    double reg;
    Eigen::LLT<Eigen::MatrixXd> llt;
  };
  std::optional<Cache> cache_;
  std::size_t jitter_events_ = 0;
};

// log det((R / lambda0) * gram + I) over the all-context Gram.
double effective_dimension(const DesignMatrix& dm, double R, double lambda0);

// Maintains A^{-1} for A = sum_i w_i v_i v_i^T + reg I by rank-one
// Sherman-Morrison updates, along with log det(A / reg).
class ShermanMorrisonInverse {
 public:
  ShermanMorrisonInverse(std::size_t dim, double reg);

  void update(const Eigen::VectorXd& v, double w);
  // v^T A^{-1} v
  double inv_quadratic(const Eigen::VectorXd& v) const;
  double logdet_ratio() const { return logdet_ratio_; }
  const Eigen::MatrixXd& inverse() const { return inverse_; }
  double reg() const { return reg_; }

 private:
  double reg_;
  Eigen::MatrixXd inverse_;
  double logdet_ratio_ = 0.0;
};

}  // namespace neurallog
