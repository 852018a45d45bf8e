#pragma once

// Infinite-width NTK Gram matrix of the ReLU network over a finite context set.

#include <cstddef>

#include <Eigen/Dense>

namespace neurallog {

// Bivariate Gaussian (u, v) with Var u = a, Var v = b, Cov(u, v) = c.
// Arc-cosine kernel identities:
//   E[max(u,0) max(v,0)] = sqrt(ab) / (2 pi) * (sin t + (pi - t) cos t)
//   E[1(u >= 0) 1(v >= 0)] = (pi - t) / (2 pi),   t = arccos(c / sqrt(ab)).
double relu_product_expectation(double a, double b, double c);
double relu_orthant_probability(double a, double b, double c);

struct NtkMatrix {
  Eigen::MatrixXd H;
  std::size_t depth = 2;
  double lambda_min = 0.0;
  // lambda_min <= 1e-10: parallel or duplicated contexts.
  bool singular = false;
};

inline constexpr std::size_t kMaxNtkContexts = 2000;

// `contexts` holds one unit-norm context per column. Throws InputError for a
// non-unit context, depth < 2, or more than kMaxNtkContexts columns.
NtkMatrix ntk_matrix(const Eigen::Ref<const Eigen::MatrixXd>& contexts, std::size_t depth);

// sqrt(2 h^T H^{-1} h). Throws NumericError when H is singular (requires
// pairwise non-parallel contexts).
double norm_param_S(const Eigen::VectorXd& h, const NtkMatrix& ntk);

}  // namespace neurallog
