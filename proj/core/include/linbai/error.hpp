#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace linbai {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  NotEnumerable,
  CapExceeded,
  MixedSupport,
  NotPSD,
  Singular,
  NotSpanning,
  NoConvergence,
  BudgetTooSmall,
  RegimeViolation,
  TooFewArms,
  InsufficientPoints,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Exception type thrown by every linbai routine. `detail()` carries an
/// auxiliary count where one is meaningful (e.g. the true set size for
/// CapExceeded).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::uint64_t detail = 0);

  ErrorCode code() const noexcept { return code_; }
  std::uint64_t detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::uint64_t detail_;
};

/// True for errors caused by numerics (singular designs and friends) rather
/// than by malformed input.
bool is_numerical(ErrorCode code);

}  // namespace linbai
