#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace vibeguard {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// RFC 3339 UTC timestamp with second precision.
std::string rfc3339(std::chrono::system_clock::time_point t);
std::string rfc3339_now();

}  // namespace vibeguard
