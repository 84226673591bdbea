#pragma once

#include <stdexcept>
#include <string>

namespace fracgreen {

/// Argument outside the domain an operation accepts.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not reach its requested accuracy. Carries the
/// best value found and the error estimate attached to it.
class PrecisionError : public std::runtime_error {
 public:
  PrecisionError(const std::string& what, double best_value, double error_estimate)
      : std::runtime_error(what), best_value_(best_value), error_estimate_(error_estimate) {}

  double best_value() const noexcept { return best_value_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double best_value_;
  double error_estimate_;
};

/// Iterative solver did not converge (Picard budget exhausted, divergence).
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fracgreen
