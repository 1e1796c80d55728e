#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace skylite {

enum class ErrorCode {
  kInvalidArgument,
  kInternal,
  kNotSupported,
  // Query compilation.
  kSyntaxError,
  kUnknownTable,
  kUnknownColumn,
  kTypeMismatch,
  kUngroupedColumn,
  // Simulated infrastructure.
  kQuotaExceeded,
  kPayloadTooLarge,
  kRequestFailed,
  kNoSuchKey,
  kRangeUnsatisfiable,
  // Storage stack.
  kSchemaMismatch,
  kCorruptFile,
  kFetchFailed,
  // Execution.
  kOutOfBudget,
  kQueryAborted,
};

std::string_view ErrorCodeName(ErrorCode code);

class SkyliteError : public std::runtime_error {
 public:
  SkyliteError(ErrorCode code, const std::string& message, std::optional<size_t> position = std::nullopt);

  ErrorCode Code() const { return code_; }
  // Byte offset into the query text, set for syntax errors.
  std::optional<size_t> Position() const { return position_; }

 private:
  ErrorCode code_;
  std::optional<size_t> position_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string& message);

inline void Assert(bool condition, const std::string& message) {
  if (!condition) {
    Fail(ErrorCode::kInternal, message);
  }
}

}  // namespace skylite
