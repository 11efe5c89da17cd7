#pragma once

#include <stdexcept>
#include <string>

namespace pmnl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension mismatches, out-of-range indices, bad domains.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A utility or log-rate exponent left the representable envelope (|x| > 700).
class NumericOverflow : public Error {
 public:
  using Error::Error;
};

/// Exhaustive search would exceed the configured enumeration limit.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// A configuration violates a modelling assumption. `assumption()` names it
/// (e.g. "Assumption 2") so front ends can report the violated condition.
class ConfigError : public Error {
 public:
  ConfigError(std::string assumption, const std::string& what)
      : Error(assumption.empty() ? what : assumption + ": " + what),
        assumption_(std::move(assumption)) {}
  explicit ConfigError(const std::string& what) : ConfigError("", what) {}

  const std::string& assumption() const noexcept { return assumption_; }

 private:
  std::string assumption_;
};

/// Confidence bounds requested before the information matrices are usable.
class NeedsMoreExploration : public Error {
 public:
  using Error::Error;
};

/// A closed-form constant came out non-finite or nonpositive.
class InternalConsistency : public Error {
 public:
  using Error::Error;
};

}  // namespace pmnl
