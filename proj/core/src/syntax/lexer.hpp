#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vibeguard/syntax.hpp"

namespace vibeguard::syntax::detail {

struct Lexed {
  Token token;
  std::vector<Token> trivia;
  bool newline_before = false;
  // Reported only once the parser actually consumes the token.
  std::optional<std::string> problem;
};

/// On-demand scanner. The parser drives context-sensitive rescans (regex,
/// JSX) by repositioning with `seek`.
class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Lexed next();
  void seek(std::uint32_t pos) noexcept { pos_ = pos; }
  std::uint32_t pos() const noexcept { return pos_; }

  /// Scans a regex literal starting at `start` (which holds '/').
  std::uint32_t scan_regex(std::uint32_t start) const;
  /// Scans a template literal starting at the backtick; returns the end
  /// offset, or nullopt-equivalent (size) with `terminated` false.
  std::uint32_t scan_template(std::uint32_t start, bool& terminated) const;
  /// Skips a `{ ... }` region (balanced, string/template/comment aware).
  std::uint32_t skip_braced(std::uint32_t start, bool& terminated) const;

  static bool is_ident_start(unsigned char c) noexcept;
  static bool is_ident_part(unsigned char c) noexcept;

 private:
  std::uint32_t scan_trivia(std::vector<Token>& out, bool& newline);
  std::uint32_t scan_string(std::uint32_t start, bool& terminated) const;
  std::uint32_t scan_number(std::uint32_t start) const;
  std::uint32_t scan_punct(std::uint32_t start) const;

  std::string_view src_;
  std::uint32_t pos_ = 0;
};

}  // namespace vibeguard::syntax::detail
