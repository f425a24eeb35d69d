#pragma once

#include <cstdint>
#include <string>

namespace vibeguard {

/// Half-open byte range into one source file. `line`/`col` describe `start`
/// and are 1-based; columns count code points, so a tab is one column.
struct Span {
  std::uint32_t start = 0;
  std::uint32_t end = 0;
  std::uint32_t line = 1;
  std::uint32_t col = 1;

  constexpr std::uint32_t size() const noexcept { return end - start; }
  constexpr bool empty() const noexcept { return start == end; }
  constexpr bool contains(const Span& other) const noexcept {
    return start <= other.start && other.end <= end;
  }
  constexpr bool contains(std::uint32_t offset) const noexcept {
    return start <= offset && offset < end;
  }

  friend constexpr bool operator==(const Span&, const Span&) = default;
};

/// A span qualified by its workspace-relative file path.
struct Location {
  std::string path;
  Span span;

  friend bool operator==(const Location&, const Location&) = default;
};

}  // namespace vibeguard
