#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bess {

enum class ErrorCode {
  DimensionMismatch,
  DimensionTooLarge,
  InvalidArgument,
  InvalidState,
  NotOptimal,
  Infeasible,
  IterationLimit,
  SocBoundViolation,
  ParseError,
  NonMonotoneTimestamps,
  InsufficientCoverage,
  ConfigError,
  UnknownPreset,
  InvalidOverride,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix, for rethrowing with more context.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace bess
