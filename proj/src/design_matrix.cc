#include "neurallog/design_matrix.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

#include "neurallog/errors.hpp"

namespace neurallog {

namespace {

void check_vector(Eigen::Index n, std::size_t dim, const char* where) {
  if (static_cast<std::size_t>(n) != dim) {
    std::ostringstream msg;
    msg << where << ": vector has dimension " << n << ", design matrix is " << dim;
    throw InputError(msg.str());
  }
}

}  // namespace

DesignMatrix::DesignMatrix(std::size_t dim, MatrixMode mode) : dim_(dim), mode_(mode) {
  const auto n = static_cast<Eigen::Index>(dim);
  diag_ = Eigen::VectorXd::Zero(n);
  if (mode == MatrixMode::kFull) gram_ = Eigen::MatrixXd::Zero(n, n);
}

void DesignMatrix::update(const Eigen::VectorXd& v, double w) {
  check_vector(v.size(), dim_, "dm_update");
  if (!(w >= 0.0)) throw InputError("dm_update: weight must be non-negative");
  if (mode_ == MatrixMode::kFull) {
    gram_.selfadjointView<Eigen::Lower>().rankUpdate(v, w);
    gram_.triangularView<Eigen::StrictlyUpper>() = gram_.transpose();
  }
  diag_.array() += w * v.array().square();
  ++count_;
}

Eigen::VectorXd DesignMatrix::diagonal() const { return diag_; }

Eigen::LLT<Eigen::MatrixXd> DesignMatrix::factorize(double reg,
                                                   std::size_t* jitter) const {
  Eigen::MatrixXd a = gram_;
  a.diagonal().array() += reg;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) return llt;

  const double trace = gram_.trace();
  const double eps = 1e-10 * (trace > 0.0 ? trace : 1.0) / static_cast<double>(dim_);
  std::clog << "design_matrix: Cholesky failed (reg=" << reg
            << "), retrying with jitter " << eps << '\n';
  a.diagonal().array() += eps;
  llt.compute(a);
  if (llt.info() != Eigen::Success) {
    throw NumericError(
        "design_matrix: factorization failed after jitter; the accumulated Gram "
        "is not positive semi-definite, try a larger regularizer or jitter");
  }
  if (jitter != nullptr) ++*jitter;
  return llt;
}

void DesignMatrix::prepare(double reg) {
  if (!(reg > 0.0)) throw InputError("dm_inv_norm: regularizer must be positive");
  if (mode_ != MatrixMode::kFull) return;
  if (cache_ && cache_->count == count_ && cache_->reg == reg) return;
  cache_ = Cache{count_, reg, factorize(reg, &jitter_events_)};
}

double DesignMatrix::inv_norm(const Eigen::VectorXd& v, double reg) const {
  check_vector(v.size(), dim_, "dm_inv_norm");
  if (!(reg > 0.0)) throw InputError("dm_inv_norm: regularizer must be positive");
  if (mode_ == MatrixMode::kDiag) {
    return std::sqrt((v.array().square() / (diag_.array() + reg)).sum());
  }
  if (cache_ && cache_->count == count_ && cache_->reg == reg) {
    return std::sqrt(v.dot(cache_->llt.solve(v)));
  }
  const auto llt = factorize(reg, nullptr);
  return std::sqrt(v.dot(llt.solve(v)));
}

double DesignMatrix::logdet_ratio(double scale) const {
  if (!(scale > 0.0)) throw InputError("dm_logdet_ratio: scale must be positive");
  if (mode_ == MatrixMode::kDiag) {
    return (scale * diag_.array()).log1p().sum();
  }
  if (count_ == 0) return 0.0;
  Eigen::MatrixXd a = scale * gram_;
  a.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericError("dm_logdet_ratio: scale * gram + I is not positive definite");
  }
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double effective_dimension(const DesignMatrix& dm, double R, double lambda0) {
  if (!(R > 0.0) || !(lambda0 > 0.0)) {
    throw InputError("effective_dimension: R and lambda0 must be positive");
  }
  return dm.logdet_ratio(R / lambda0);
}

ShermanMorrisonInverse::ShermanMorrisonInverse(std::size_t dim, double reg)
    : reg_(reg) {
  if (!(reg > 0.0)) throw InputError("ShermanMorrisonInverse: reg must be positive");
  const auto n = static_cast<Eigen::Index>(dim);
  inverse_ = Eigen::MatrixXd::Identity(n, n) / reg;
}

void ShermanMorrisonInverse::update(const Eigen::VectorXd& v, double w) {
  check_vector(v.size(), static_cast<std::size_t>(inverse_.rows()),
               "ShermanMorrisonInverse::update");
  if (!(w >= 0.0)) throw InputError("ShermanMorrisonInverse: weight must be non-negative");
  if (w == 0.0) return;
  const Eigen::VectorXd u = inverse_ * v;
  const double quad = v.dot(u);
  const double denom = 1.0 + w * quad;
  inverse_.noalias() -= (w / denom) * (u * u.transpose());
  // Matrix determinant lemma.
  logdet_ratio_ += std::log1p(w * quad);
}

double ShermanMorrisonInverse::inv_quadratic(const Eigen::VectorXd& v) const {
  return v.dot(inverse_ * v);
}

}  // namespace neurallog
