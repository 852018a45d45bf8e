#pragma once

#include <stdexcept>
#include <string>

namespace neurallog {

// Invalid configuration (odd width, bad delta, unknown algorithm, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input data: wrong dimension, non-unit context, bad CSV, ...
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Floating-point trouble: overflow, failed factorization, singular kernel.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Gradient descent produced a non-finite loss.
class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : NumericError(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

}  // namespace neurallog
