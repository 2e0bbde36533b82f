#pragma once

#include <stdexcept>
#include <string>

namespace ilab {

/// Argument outside the domain of an operation (x outside [0,1], z >= 1, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Input object violates its invariants (negative mass, bad spec string, ...).
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Iterative method did not converge; carries the last residual seen.
class NumericalError : public std::runtime_error {
public:
  NumericalError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// Request would exceed an enumeration or memory guard.
class ResourceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace ilab
