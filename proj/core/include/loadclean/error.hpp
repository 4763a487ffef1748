#pragma once

#include <stdexcept>
#include <string>

namespace loadclean {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied something that violates a documented precondition
// (malformed CSV, bad parameter, decision on an unflagged index ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A numeric kernel failed to converge or produced a non-finite result.
class NumericFailure : public Error {
 public:
  using Error::Error;
};

// The spectrum has no bin clearly above the noise floor.
class NoPeriodicity : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

// The requested detection strategy cannot be applied to a group
// (gamma on non-positive data, IQR on fewer than four members ...).
class StrategyInapplicable : public Error {
 public:
  using Error::Error;
};

// Re-throws `e` with `prefix` prepended, preserving its dynamic category.
[[noreturn]] void rethrow_with_context(const Error& e, const std::string& prefix);

}  // namespace loadclean
