#include "syntax/lexer.hpp"

#include <array>

namespace vibeguard::syntax::detail {
namespace {

// '>' never starts a multi-character operator here: the parser glues `>>`,
// `>=` and friends back together so generic argument lists close cleanly.
constexpr std::array<std::string_view, 40> kPuncts = {
    "...", "===", "!==", "**=", "<<=", "&&=", "||=", "?\?=", "=>", "==", "!=", "<=", "<<",
    "&&",  "||",  "??",  "?.",  "**",  "++",  "--",  "+=",  "-=",  "*=", "/=", "%=", "&=",
    "|=",  "^=",  "{",   "}",   "(",   ")",   "[",   "]",   ";",   ",",  "<",  ">",  "=",
    "."};

constexpr std::string_view kSingles = "+-*/%&|^!~?:@#";

bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

}  // namespace

bool Lexer::is_ident_start(unsigned char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' || c >= 0x80;
}

bool Lexer::is_ident_part(unsigned char c) noexcept { return is_ident_start(c) || is_digit(c); }

std::uint32_t Lexer::scan_trivia(std::vector<Token>& out, bool& newline) {
  const auto n = static_cast<std::uint32_t>(src_.size());
  while (pos_ < n) {
    const std::uint32_t start = pos_;
    const auto c = static_cast<unsigned char>(src_[pos_]);
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f' ||
        src_.substr(pos_, 2) == "\xC2\xA0" || src_.substr(pos_, 3) == "\xEF\xBB\xBF" ||
        src_.substr(pos_, 3) == "\xE2\x80\xA8" || src_.substr(pos_, 3) == "\xE2\x80\xA9") {
      while (pos_ < n) {
        const auto d = static_cast<unsigned char>(src_[pos_]);
        if (d == ' ' || d == '\t' || d == '\v' || d == '\f') {
          ++pos_;
        } else if (d == '\r' || d == '\n') {
          newline = true;
          ++pos_;
        } else if (src_.substr(pos_, 2) == "\xC2\xA0") {
          pos_ += 2;
        } else if (src_.substr(pos_, 3) == "\xEF\xBB\xBF") {
          pos_ += 3;
        } else if (src_.substr(pos_, 3) == "\xE2\x80\xA8" || src_.substr(pos_, 3) == "\xE2\x80\xA9") {
          newline = true;
          pos_ += 3;
        } else {
          break;
        }
      }
      out.push_back({TokenKind::Whitespace, {start, pos_}});
    } else if (src_.substr(pos_, 2) == "//") {
      while (pos_ < n && src_[pos_] != '\n' && src_[pos_] != '\r') ++pos_;
      out.push_back({TokenKind::LineComment, {start, pos_}});
    } else if (src_.substr(pos_, 2) == "/*") {
      const auto close = src_.find("*/", pos_ + 2);
      pos_ = close == std::string_view::npos ? n : static_cast<std::uint32_t>(close + 2);
      if (src_.substr(start, pos_ - start).find('\n') != std::string_view::npos) newline = true;
      out.push_back({TokenKind::BlockComment, {start, pos_}});
      if (close == std::string_view::npos) return start;  // unterminated
    } else {
      break;
    }
  }
  return n + 1;
}

std::uint32_t Lexer::scan_string(std::uint32_t start, bool& terminated) const {
  const auto n = static_cast<std::uint32_t>(src_.size());
  const char quote = src_[start];
  std::uint32_t p = start + 1;
  terminated = false;
  while (p < n) {
    const char c = src_[p];
    if (c == '\\') {
      p += (p + 1 < n) ? 2 : 1;
      continue;
    }
    if (c == quote) {
      terminated = true;
      return p + 1;
    }
    if (c == '\n' || c == '\r') return p;
    ++p;
  }
  return p;
}

std::uint32_t Lexer::scan_template(std::uint32_t start, bool& terminated) const {
  const auto n = static_cast<std::uint32_t>(src_.size());
  std::uint32_t p = start + 1;
  terminated = false;
  while (p < n) {
    const char c = src_[p];
    if (c == '\\') {
      p += (p + 1 < n) ? 2 : 1;
    } else if (c == '`') {
      terminated = true;
      return p + 1;
    } else if (c == '$' && p + 1 < n && src_[p + 1] == '{') {
      bool closed = false;
      p = skip_braced(p + 1, closed);
      if (!closed) return p;
    } else {
      ++p;
    }
  }
  return p;
}

std::uint32_t Lexer::skip_braced(std::uint32_t start, bool& terminated) const {
  const auto n = static_cast<std::uint32_t>(src_.size());
  std::uint32_t p = start;
  int depth = 0;
  terminated = false;
  while (p < n) {
    const char c = src_[p];
    if (c == '{') {
      ++depth;
      ++p;
    } else if (c == '}') {
      --depth;
      ++p;
      if (depth == 0) {
        terminated = true;
        return p;
      }
    } else if (c == '\'' || c == '"') {
      bool ok = false;
      p = scan_string(p, ok);
      if (!ok && p < n) ++p;
    } else if (c == '`') {
      bool ok = false;
      p = scan_template(p, ok);
      if (!ok) return p;
    } else if (src_.substr(p, 2) == "//") {
      while (p < n && src_[p] != '\n') ++p;
    } else if (src_.substr(p, 2) == "/*") {
      const auto close = src_.find("*/", p + 2);
      p = close == std::string_view::npos ? n : static_cast<std::uint32_t>(close + 2);
    } else {
      ++p;
    }
  }
  return p;
}

std::uint32_t Lexer::scan_number(std::uint32_t start) const {
  const auto n = static_cast<std::uint32_t>(src_.size());
  std::uint32_t p = start;
  auto alnum = [&](std::uint32_t q) {
    return q < n && (is_ident_part(static_cast<unsigned char>(src_[q])));
  };
  if (src_[p] == '0' && p + 1 < n &&
      (src_[p + 1] == 'x' || src_[p + 1] == 'X' || src_[p + 1] == 'b' || src_[p + 1] == 'B' ||
       src_[p + 1] == 'o' || src_[p + 1] == 'O')) {
    p += 2;
    while (alnum(p)) ++p;
    return p;
  }
  while (p < n && (is_digit(static_cast<unsigned char>(src_[p])) || src_[p] == '_')) ++p;
  if (p < n && src_[p] == '.' && !(p + 1 < n && src_[p + 1] == '.')) {
    ++p;
    while (p < n && (is_digit(static_cast<unsigned char>(src_[p])) || src_[p] == '_')) ++p;
  }
  if (p < n && (src_[p] == 'e' || src_[p] == 'E')) {
    std::uint32_t q = p + 1;
    if (q < n && (src_[q] == '+' || src_[q] == '-')) ++q;
    if (q < n && is_digit(static_cast<unsigned char>(src_[q]))) {
      p = q;
      while (p < n && is_digit(static_cast<unsigned char>(src_[p]))) ++p;
    }
  }
  if (p < n && src_[p] == 'n') ++p;
  return p;
}

std::uint32_t Lexer::scan_punct(std::uint32_t start) const {
  const std::string_view rest = src_.substr(start);
  for (std::string_view p : kPuncts) {
    if (rest.starts_with(p)) {
      // `a?.5:b` is a conditional, not optional chaining.
      if (p == "?." && rest.size() > 2 && is_digit(static_cast<unsigned char>(rest[2]))) continue;
      return start + static_cast<std::uint32_t>(p.size());
    }
  }
  if (kSingles.find(rest[0]) != std::string_view::npos) return start + 1;
  return start;
}

std::uint32_t Lexer::scan_regex(std::uint32_t start) const {
  const auto n = static_cast<std::uint32_t>(src_.size());
  std::uint32_t p = start + 1;
  bool in_class = false;
  while (p < n) {
    const char c = src_[p];
    if (c == '\n' || c == '\r') return p;
    if (c == '\\') {
      p += 2;
      continue;
    }
    if (c == '[') in_class = true;
    if (c == ']') in_class = false;
    ++p;
    if (c == '/' && !in_class) {
      while (p < n && is_ident_part(static_cast<unsigned char>(src_[p]))) ++p;
      return p;
    }
  }
  return n;
}

Lexed Lexer::next() {
  Lexed out;
  const std::uint32_t unterminated = scan_trivia(out.trivia, out.newline_before);
  if (unterminated < src_.size()) out.problem = "unterminated block comment";
  const auto n = static_cast<std::uint32_t>(src_.size());
  const std::uint32_t start = pos_;
  if (pos_ >= n) {
    out.token = {TokenKind::End, {n, n}};
    return out;
  }
  const auto c = static_cast<unsigned char>(src_[pos_]);
  TokenKind kind = TokenKind::Unknown;
  std::uint32_t end = start + 1;
  if (is_ident_start(c) || (c == '#' && start + 1 < n &&
                            is_ident_start(static_cast<unsigned char>(src_[start + 1])))) {
    end = start + 1;
    while (end < n && is_ident_part(static_cast<unsigned char>(src_[end]))) ++end;
    kind = TokenKind::Identifier;
  } else if (is_digit(c) ||
             (c == '.' && start + 1 < n && is_digit(static_cast<unsigned char>(src_[start + 1])))) {
    end = scan_number(start);
    kind = TokenKind::Number;
  } else if (c == '\'' || c == '"') {
    bool ok = false;
    end = scan_string(start, ok);
    kind = TokenKind::String;
    if (!ok) out.problem = "unterminated string literal";
  } else if (c == '`') {
    bool ok = false;
    end = scan_template(start, ok);
    kind = TokenKind::Template;
    if (!ok) out.problem = "unterminated template literal";
  } else {
    end = scan_punct(start);
    if (end == start) {
      // Stray byte: consume one whole code point so spans stay on boundaries.
      end = start + 1;
      while (end < n && (static_cast<unsigned char>(src_[end]) & 0xC0) == 0x80) ++end;
      kind = TokenKind::Unknown;
      out.problem = "unexpected character";
    } else {
      kind = TokenKind::Punct;
    }
  }
  pos_ = end;
  out.token = {kind, {start, end}};
  return out;
}

}  // namespace vibeguard::syntax::detail
