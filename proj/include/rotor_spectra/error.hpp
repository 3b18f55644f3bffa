#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rotor {

enum class ErrorCode {
  DuplicateSpeed,
  EmptyBand,
  NonBandable,
  DimensionTooSmall,
  EpsOutOfRange,
  NoConvergence,
  AmbiguousLabelling,
  GammaViolated,
  DegenerateBlock,
  DegenerateFirstOrder,
  NonOrthogonal,
  EigsNotSimple,
  EpsZero,
  ZeroVector,
  NotLaplacian,
  MismatchBeyondTolerance,
  InsufficientData,
  NoComplexEigenvalues,
  InvalidArgument,
  Config,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateSpeed: return "DuplicateSpeed";
    case ErrorCode::EmptyBand: return "EmptyBand";
    case ErrorCode::NonBandable: return "NonBandable";
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::EpsOutOfRange: return "EpsOutOfRange";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::AmbiguousLabelling: return "AmbiguousLabelling";
    case ErrorCode::GammaViolated: return "GammaViolated";
    case ErrorCode::DegenerateBlock: return "DegenerateBlock";
    case ErrorCode::DegenerateFirstOrder: return "DegenerateFirstOrder";
    case ErrorCode::NonOrthogonal: return "NonOrthogonal";
    case ErrorCode::EigsNotSimple: return "EigsNotSimple";
    case ErrorCode::EpsZero: return "EpsZero";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NotLaplacian: return "NotLaplacian";
    case ErrorCode::MismatchBeyondTolerance: return "MismatchBeyondTolerance";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NoComplexEigenvalues: return "NoComplexEigenvalues";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above, so
/// callers (and the CLI exit-code mapping) can dispatch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rotor
