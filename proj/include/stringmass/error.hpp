#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stringmass {

enum class ErrorCode {
  InvalidArgument,
  NoRealPositiveRoot,
  ToleranceNotMet,
  DegenerateBranch,
  BranchAmbiguity,
  ValidationFailed,
  GridMismatch,
  RobinViolation,
  BracketCollision,
  FrequencyDomainError,
  CFLViolation,
  BlowUp,
  BasisMismatch,
  InsufficientModes,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NoRealPositiveRoot: return "NoRealPositiveRoot";
    case ErrorCode::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorCode::DegenerateBranch: return "DegenerateBranch";
    case ErrorCode::BranchAmbiguity: return "BranchAmbiguity";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::RobinViolation: return "RobinViolation";
    case ErrorCode::BracketCollision: return "BracketCollision";
    case ErrorCode::FrequencyDomainError: return "FrequencyDomainError";
    case ErrorCode::CFLViolation: return "CFLViolation";
    case ErrorCode::BlowUp: return "BlowUp";
    case ErrorCode::BasisMismatch: return "BasisMismatch";
    case ErrorCode::InsufficientModes: return "InsufficientModes";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code; the CLI maps codes to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stringmass
