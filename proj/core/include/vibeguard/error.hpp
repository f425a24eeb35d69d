#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vibeguard {

enum class ErrorCode {
  InvalidEncoding,
  InputTooLarge,
  SpanOutOfBounds,
  NameCollision,
  StorageFailure,
  SchemaVersionMismatch,
  IntegrityError,
  IllegalTransition,
  UnknownId,
  OracleUnavailable,
  OracleTimeout,
  UnfixableScope,
  AmbiguousFix,
  StaleSnapshot,
  PostEditParseFailure,
  RegressionDetected,
  WorkspaceUnreadable,
  StoreCorrupt,
  WatchUnavailable,
  BindFailure,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure surfaced by the library carries one of the codes above so
/// callers (CLI, HTTP layer) can map it to exit statuses and HTTP codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix that what() carries.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace vibeguard
