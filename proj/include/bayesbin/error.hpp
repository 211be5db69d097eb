#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bayesbin {

enum class ErrorCode {
  // data errors
  UnknownColumn,
  MissingField,
  UnparseableNumber,
  UnknownTargetLabel,
  SampleTooLarge,
  DegenerateClasses,
  EmptyTable,
  EmptyInput,
  UnseenLevel,
  Io,
  CorruptChainFile,
  // numerical failures
  NonFiniteGradient,
  AdaptationFailure,
  NonFiniteEvaluation,
  TooFewDraws,
  DimensionTooHigh,
  GridTooCoarse,
  TooLarge,
  // mismatches
  DimensionMismatch,
  DatasetMismatch,
  EncodingMismatch,
  // caller errors
  InvalidArgument,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::UnparseableNumber: return "UnparseableNumber";
    case ErrorCode::UnknownTargetLabel: return "UnknownTargetLabel";
    case ErrorCode::SampleTooLarge: return "SampleTooLarge";
    case ErrorCode::DegenerateClasses: return "DegenerateClasses";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::UnseenLevel: return "UnseenLevel";
    case ErrorCode::Io: return "Io";
    case ErrorCode::CorruptChainFile: return "CorruptChainFile";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::AdaptationFailure: return "AdaptationFailure";
    case ErrorCode::NonFiniteEvaluation: return "NonFiniteEvaluation";
    case ErrorCode::TooFewDraws: return "TooFewDraws";
    case ErrorCode::DimensionTooHigh: return "DimensionTooHigh";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DatasetMismatch: return "DatasetMismatch";
    case ErrorCode::EncodingMismatch: return "EncodingMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Process exit status for an error: 2 usage, 3 data, 4 numerical, 5 mismatch.
inline int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return 2;
    case ErrorCode::NonFiniteGradient:
    case ErrorCode::AdaptationFailure:
    case ErrorCode::NonFiniteEvaluation:
    case ErrorCode::TooFewDraws:
    case ErrorCode::DimensionTooHigh:
    case ErrorCode::GridTooCoarse:
    case ErrorCode::TooLarge:
      return 4;
    case ErrorCode::DimensionMismatch:
    case ErrorCode::DatasetMismatch:
    case ErrorCode::EncodingMismatch:
      return 5;
    default:
      return 3;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace bayesbin
