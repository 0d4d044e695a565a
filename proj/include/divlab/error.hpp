// Copyright 2026 The divlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace divlab {

enum class ErrorCode {
  kLengthMismatch,
  kNegativeWeight,
  kZeroTotalMass,
  kNotNormalized,
  kDuplicateAtom,
  kUnmappedAtom,
  kSpaceMismatch,
  kNotAbsolutelyContinuous,
  kInvalidPartition,
  kNegativeArgument,
  kInvalidFunction,
  kBracketFailure,
  kUnboundedObjective,
  kInvalidDensity,
  kInvalidSpec,
  kUnsupported,
  kPreconditionViolated,
  kConfigParseError,
  kUnknownFamily,
  kIoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kNegativeWeight: return "NegativeWeight";
    case ErrorCode::kZeroTotalMass: return "ZeroTotalMass";
    case ErrorCode::kNotNormalized: return "NotNormalized";
    case ErrorCode::kDuplicateAtom: return "DuplicateAtom";
    case ErrorCode::kUnmappedAtom: return "UnmappedAtom";
    case ErrorCode::kSpaceMismatch: return "SpaceMismatch";
    case ErrorCode::kNotAbsolutelyContinuous: return "NotAbsolutelyContinuous";
    case ErrorCode::kInvalidPartition: return "InvalidPartition";
    case ErrorCode::kNegativeArgument: return "NegativeArgument";
    case ErrorCode::kInvalidFunction: return "InvalidFunction";
    case ErrorCode::kBracketFailure: return "BracketFailure";
    case ErrorCode::kUnboundedObjective: return "UnboundedObjective";
    case ErrorCode::kInvalidDensity: return "InvalidDensity";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kUnsupported: return "Unsupported";
    case ErrorCode::kPreconditionViolated: return "PreconditionViolated";
    case ErrorCode::kConfigParseError: return "ConfigParseError";
    case ErrorCode::kUnknownFamily: return "UnknownFamily";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace divlab
