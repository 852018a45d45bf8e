#include "neurallog/link.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "neurallog/errors.hpp"

namespace neurallog {

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double sigmoid_derivative(double z) {
  // exp(-|z|) / (1 + exp(-|z|))^2 is symmetric and never overflows.
  const double e = std::exp(-std::fabs(z));
  const double denom = 1.0 + e;
  return e / (denom * denom);
}

double log_sigmoid(double z) {
  if (z >= 0.0) {
    return -std::log1p(std::exp(-z));
  }
  return z - std::log1p(std::exp(z));
}

LinkEval link_eval(double z) {
  if (!std::isfinite(z)) {
    throw std::domain_error("link_eval: logit must be finite");
  }
  LinkEval out;
  out.mu = sigmoid(z);
  out.dmu = sigmoid_derivative(z);
  // 1 - 2 mu = tanh(-z/2), accurate near mu ~ 1.
  out.ddmu = out.dmu * std::tanh(-0.5 * z);
  return out;
}

KappaR kappa_for_bound(double logit_bound) {
  if (!(logit_bound >= 0.0) || !std::isfinite(logit_bound)) {
    throw InputError("kappa_for_bound: bound must be finite and non-negative");
  }
  const double dmu = sigmoid_derivative(logit_bound);
  const double kappa = 1.0 / dmu;
  if (dmu < std::numeric_limits<double>::min() || !std::isfinite(kappa)) {
    std::ostringstream msg;
    msg << "kappa_for_bound: dmu(" << logit_bound
        << ") underflows; kappa overflows for logit bound B=" << logit_bound;
    throw NumericError(msg.str());
  }
  return {kappa, 0.25};
}

}  // namespace neurallog
