#include "vibeguard/error.hpp"

namespace vibeguard {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidEncoding: return "InvalidEncoding";
    case ErrorCode::InputTooLarge: return "InputTooLarge";
    case ErrorCode::SpanOutOfBounds: return "SpanOutOfBounds";
    case ErrorCode::NameCollision: return "NameCollision";
    case ErrorCode::StorageFailure: return "StorageFailure";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::IntegrityError: return "IntegrityError";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::OracleUnavailable: return "OracleUnavailable";
    case ErrorCode::OracleTimeout: return "OracleTimeout";
    case ErrorCode::UnfixableScope: return "UnfixableScope";
    case ErrorCode::AmbiguousFix: return "AmbiguousFix";
    case ErrorCode::StaleSnapshot: return "StaleSnapshot";
    case ErrorCode::PostEditParseFailure: return "PostEditParseFailure";
    case ErrorCode::RegressionDetected: return "RegressionDetected";
    case ErrorCode::WorkspaceUnreadable: return "WorkspaceUnreadable";
    case ErrorCode::StoreCorrupt: return "StoreCorrupt";
    case ErrorCode::WatchUnavailable: return "WatchUnavailable";
    case ErrorCode::BindFailure: return "BindFailure";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

}  // namespace vibeguard
