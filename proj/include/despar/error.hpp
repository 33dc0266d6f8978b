#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace despar {

enum class ErrorCode {
  InvalidArgument,
  ZeroVarianceColumn,
  NoEligibleFit,
  IndexMismatch,
  SingularSigma,
  EmptyH,
  LagTooLarge,
  SingularTau,
  SingularPsi,
  BadDimension,
  EmptyS,
  DimensionMismatch,
  ParseError,
  UnknownColumn,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable error code. Input errors
/// (ParseError, UnknownColumn, BadDimension, InvalidArgument, ...) and
/// numerical failures share this type; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for failures caused by the numbers rather than by malformed input.
  bool is_numerical() const noexcept;

 private:
  ErrorCode code_;
};

}  // namespace despar
