#include "linbai/error.hpp"

namespace linbai {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotEnumerable: return "NotEnumerable";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::MixedSupport: return "MixedSupport";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::NotSpanning: return "NotSpanning";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::BudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::RegimeViolation: return "RegimeViolation";
    case ErrorCode::TooFewArms: return "TooFewArms";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what, std::uint64_t detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + what),
      code_(code),
      detail_(detail) {}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPSD:
    case ErrorCode::Singular:
    case ErrorCode::NotSpanning:
    case ErrorCode::NoConvergence:
      return true;
    default:
      return false;
  }
}

}  // namespace linbai
