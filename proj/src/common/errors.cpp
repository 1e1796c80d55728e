#include "skylite/common/errors.hpp"

namespace skylite {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kInternal:
      return "Internal";
    case ErrorCode::kNotSupported:
      return "NotSupported";
    case ErrorCode::kSyntaxError:
      return "SyntaxError";
    case ErrorCode::kUnknownTable:
      return "UnknownTable";
    case ErrorCode::kUnknownColumn:
      return "UnknownColumn";
    case ErrorCode::kTypeMismatch:
      return "TypeMismatch";
    case ErrorCode::kUngroupedColumn:
      return "UngroupedColumn";
    case ErrorCode::kQuotaExceeded:
      return "QuotaExceeded";
    case ErrorCode::kPayloadTooLarge:
      return "PayloadTooLarge";
    case ErrorCode::kRequestFailed:
      return "RequestFailed";
    case ErrorCode::kNoSuchKey:
      return "NoSuchKey";
    case ErrorCode::kRangeUnsatisfiable:
      return "RangeUnsatisfiable";
    case ErrorCode::kSchemaMismatch:
      return "SchemaMismatch";
    case ErrorCode::kCorruptFile:
      return "CorruptFile";
    case ErrorCode::kFetchFailed:
      return "FetchFailed";
    case ErrorCode::kOutOfBudget:
      return "OutOfBudget";
    case ErrorCode::kQueryAborted:
      return "QueryAborted";
  }
  return "Unknown";
}

namespace {

std::string FormatMessage(ErrorCode code, const std::string& message, std::optional<size_t> position) {
  std::string result(ErrorCodeName(code));
  if (position) {
    result += " at offset " + std::to_string(*position);
  }
  result += ": " + message;
  return result;
}

}  // namespace

SkyliteError::SkyliteError(ErrorCode code, const std::string& message, std::optional<size_t> position)
    : std::runtime_error(FormatMessage(code, message, position)), code_(code), position_(position) {}

void Fail(ErrorCode code, const std::string& message) { throw SkyliteError(code, message); }

}  // namespace skylite
