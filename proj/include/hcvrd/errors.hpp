#pragma once

#include <stdexcept>
#include <string>

namespace hcvrd {

/// Input outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A formula that does not apply to the given parameters (e.g. divides by a zero constant).
class NotApplicableError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed, incomplete or out-of-range configuration. `key()` names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Numerical failure: non-convergence, non-finite values, residual blow-up.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hcvrd
