#include "despar/error.hpp"

namespace despar {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroVarianceColumn: return "ZeroVarianceColumn";
    case ErrorCode::NoEligibleFit: return "NoEligibleFit";
    case ErrorCode::IndexMismatch: return "IndexMismatch";
    case ErrorCode::SingularSigma: return "SingularSigma";
    case ErrorCode::EmptyH: return "EmptyH";
    case ErrorCode::LagTooLarge: return "LagTooLarge";
    case ErrorCode::SingularTau: return "SingularTau";
    case ErrorCode::SingularPsi: return "SingularPsi";
    case ErrorCode::BadDimension: return "BadDimension";
    case ErrorCode::EmptyS: return "EmptyS";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
  }
  return "Unknown";
}

bool Error::is_numerical() const noexcept {
  switch (code_) {
    case ErrorCode::ZeroVarianceColumn:
    case ErrorCode::NoEligibleFit:
    case ErrorCode::SingularSigma:
    case ErrorCode::SingularTau:
    case ErrorCode::SingularPsi:
      return true;
    default:
      return false;
  }
}

}  // namespace despar
