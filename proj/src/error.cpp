#include "bess/error.hpp"

namespace bess {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::NotOptimal: return "NotOptimal";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::IterationLimit: return "IterationLimit";
    case ErrorCode::SocBoundViolation: return "SocBoundViolation";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonMonotoneTimestamps: return "NonMonotoneTimestamps";
    case ErrorCode::InsufficientCoverage: return "InsufficientCoverage";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::InvalidOverride: return "InvalidOverride";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace bess
