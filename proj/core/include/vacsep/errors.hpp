#pragma once

#include <stdexcept>
#include <string>

namespace vacsep {

/// Raised when caller-supplied parameters violate a precondition.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The two local variances differ by more than the symmetry tolerance, so the
/// symmetric degree of entanglement is undefined for this matrix.
class AsymmetricStateError : public InputError {
 public:
  using InputError::InputError;
};

/// Coupling alpha >= 1 puts a zero mode in the chain spectrum.
class DivergenceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An adaptive integral did not reach its requested tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved_error)
      : std::runtime_error(what + " (achieved error estimate " +
                           std::to_string(achieved_error) + ")"),
        achieved_error_(achieved_error) {}

  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

}  // namespace vacsep
