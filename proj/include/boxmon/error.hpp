#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace boxmon {

enum class ErrorCode {
  EmptyPointSet,
  DimensionMismatch,
  NonFiniteValue,
  InvalidBox,
  NotASubBox,
  InvalidPartition,
  TooManyCells,
  CellCountOverflow,
  KTooLarge,
  InvalidArgument,
  UnknownClass,
  MalformedMonitorFile,
  MalformedFeatureFile,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyPointSet: return "EmptyPointSet";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::InvalidBox: return "InvalidBox";
    case ErrorCode::NotASubBox: return "NotASubBox";
    case ErrorCode::InvalidPartition: return "InvalidPartition";
    case ErrorCode::TooManyCells: return "TooManyCells";
    case ErrorCode::CellCountOverflow: return "CellCountOverflow";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::MalformedMonitorFile: return "MalformedMonitorFile";
    case ErrorCode::MalformedFeatureFile: return "MalformedFeatureFile";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every recoverable failure in the library is reported as an Error carrying a code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Thrown when an internal invariant does not hold (a bug, not bad input).
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace boxmon
