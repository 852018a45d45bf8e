#include "neurallog/ntk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "neurallog/errors.hpp"

namespace neurallog {

namespace {

double correlation_angle(double a, double b, double c) {
  const double scale = std::sqrt(a * b);
  if (scale <= 0.0) return std::numbers::pi / 2.0;
  return std::acos(std::clamp(c / scale, -1.0, 1.0));
}

}  // namespace

double relu_product_expectation(double a, double b, double c) {
  const double t = correlation_angle(a, b, c);
  return std::sqrt(a * b) / (2.0 * std::numbers::pi) *
         (std::sin(t) + (std::numbers::pi - t) * std::cos(t));
}

double relu_orthant_probability(double a, double b, double c) {
  const double t = correlation_angle(a, b, c);
  return (std::numbers::pi - t) / (2.0 * std::numbers::pi);
}

NtkMatrix ntk_matrix(const Eigen::Ref<const Eigen::MatrixXd>& contexts,
                     std::size_t depth) {
  if (depth < 2) throw InputError("ntk_matrix: depth must be at least 2");
  const Eigen::Index n = contexts.cols();
  if (static_cast<std::size_t>(n) > kMaxNtkContexts) {
    std::ostringstream msg;
    msg << "ntk_matrix: " << n << " contexts exceeds the limit of " << kMaxNtkContexts;
    throw InputError(msg.str());
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::fabs(contexts.col(i).norm() - 1.0) > 1e-8) {
      std::ostringstream msg;
      msg << "ntk_matrix: context " << i << " is not unit-norm (norm "
          << contexts.col(i).norm() << ")";
      throw InputError(msg.str());
    }
  }

  Eigen::MatrixXd sigma = contexts.transpose() * contexts;
  Eigen::MatrixXd h_hat = sigma;
  for (std::size_t l = 1; l < depth; ++l) {
    Eigen::MatrixXd next_sigma(n, n);
    Eigen::MatrixXd next_h(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = j; i < n; ++i) {
        const double a = sigma(i, i);
        const double b = sigma(j, j);
        const double c = sigma(i, j);
        const double s = 2.0 * relu_product_expectation(a, b, c);
        const double hv = 2.0 * h_hat(i, j) * relu_orthant_probability(a, b, c) + s;
        next_sigma(i, j) = next_sigma(j, i) = s;
        next_h(i, j) = next_h(j, i) = hv;
      }
    }
    sigma = std::move(next_sigma);
    h_hat = std::move(next_h);
  }

  NtkMatrix out;
  out.depth = depth;
  out.H = 0.5 * (h_hat + sigma);
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.H, Eigen::EigenvaluesOnly);
    out.lambda_min = eig.eigenvalues().minCoeff();
  }
  out.singular = out.lambda_min <= 1e-10;
  return out;
}

double norm_param_S(const Eigen::VectorXd& h, const NtkMatrix& ntk) {
  if (h.size() != ntk.H.rows()) {
    throw InputError("norm_param_S: h length does not match the NTK matrix");
  }
  if (ntk.singular || ntk.lambda_min <= 1e-10) {
    throw NumericError(
        "norm_param_S: NTK matrix is singular; the kernel needs pairwise "
        "non-parallel contexts to be positive definite");
  }
  if (h.isZero(0.0)) return 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(ntk.H);
  if (llt.info() != Eigen::Success) {
    throw NumericError("norm_param_S: NTK matrix is not positive definite");
  }
  return std::sqrt(2.0 * h.dot(llt.solve(h)));
}

}  // namespace neurallog
