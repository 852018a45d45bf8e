#pragma once

// Sigmoid link of the logistic reward model and the constants derived from it.

namespace neurallog {

struct LinkEval {
  double mu = 0.5;     // sigmoid(z)
  double dmu = 0.25;   // mu * (1 - mu)
  double ddmu = 0.0;   // dmu * (1 - 2 mu)
};

// Throws std::domain_error for non-finite z.
LinkEval link_eval(double z);

// Cheap scalar versions used in the inner loops; no finiteness check.
double sigmoid(double z);
double sigmoid_derivative(double z);

// log(sigmoid(z)) without cancellation for large |z|.
double log_sigmoid(double z);

struct KappaR {
  double kappa = 4.0;
  double R = 0.25;
};

// Worst-case inverse variance 1/dmu(B) when logits lie in [-B, B].
// Throws NumericError when dmu(B) underflows.
KappaR kappa_for_bound(double logit_bound);

}  // namespace neurallog
