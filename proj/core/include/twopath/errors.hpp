#pragma once

#include <stdexcept>
#include <string>

namespace twopath {

// Invalid argument to a pure computation (negative length, NaN, empty path).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A quantity that is mathematically undefined for the given input, e.g. the
// visibility of an all-dark scan.
class UndefinedQuantityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Numerical setup rejected by the wavepacket solver (grid, step size, boundary).
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The analytic propagation formula is not expected to hold for these inputs.
class RegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace twopath
