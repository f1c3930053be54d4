#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rebalance {

enum class ErrorCode {
  InvalidArgument,
  InvalidSchema,
  InvalidTarget,
  MissingColumn,
  UnknownColumn,
  UnknownCategory,
  NumericParseError,
  EmptyFile,
  MalformedCsv,
  SchemaMismatch,
  ClassTooSmall,
  FractionNotBelowCurrent,
  MinorityVanishes,
  NoMinorityRows,
  TooFewMinorityRows,
  NoNumericAndNoCategorical,
  EmptyTable,
  SingleClassTable,
  UnknownConditionValue,
  SingleClassLabels,
  NoPositives,
  EmptyColumn,
  EmptySubgroup,
  MalformedResults,
  MalformedModel,
  IoError,
};

inline constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidSchema: return "InvalidSchema";
    case ErrorCode::InvalidTarget: return "InvalidTarget";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::NumericParseError: return "NumericParseError";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::FractionNotBelowCurrent: return "FractionNotBelowCurrent";
    case ErrorCode::MinorityVanishes: return "MinorityVanishes";
    case ErrorCode::NoMinorityRows: return "NoMinorityRows";
    case ErrorCode::TooFewMinorityRows: return "TooFewMinorityRows";
    case ErrorCode::NoNumericAndNoCategorical: return "NoNumericAndNoCategorical";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::SingleClassTable: return "SingleClassTable";
    case ErrorCode::UnknownConditionValue: return "UnknownConditionValue";
    case ErrorCode::SingleClassLabels: return "SingleClassLabels";
    case ErrorCode::NoPositives: return "NoPositives";
    case ErrorCode::EmptyColumn: return "EmptyColumn";
    case ErrorCode::EmptySubgroup: return "EmptySubgroup";
    case ErrorCode::MalformedResults: return "MalformedResults";
    case ErrorCode::MalformedModel: return "MalformedModel";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// All library failures are reported through this exception; code() is stable,
// what() carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) {
  throw Error(code, detail);
}

}  // namespace rebalance
