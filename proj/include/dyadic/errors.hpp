#pragma once

#include <stdexcept>
#include <string>

namespace dyadic {

/// Invalid user-facing configuration: exponents, hypotheses, flags, files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A cube or point falls outside the finite root system.
class OutOfSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mathematical precondition failed (divergent integral, empty family, ...).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A checked inequality or structural invariant did not hold.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dyadic
