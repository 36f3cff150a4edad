#pragma once

#include <stdexcept>
#include <string>

namespace pprep {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Inputs that are valid in principle but outside the range an algorithm
// is implemented for (e.g. Kummer M with b <= a).
class UnsupportedDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Adaptive quadrature ran out of subdivisions. Carries the best estimate
// reached so callers may still report it as a diagnostic.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_estimate,
                   double error_estimate)
      : std::runtime_error(what),
        best_estimate_(best_estimate),
        error_estimate_(error_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double best_estimate_;
  double error_estimate_;
};

// Object used in a state that does not support the operation
// (e.g. summarizing an unnormalized grid).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace pprep
