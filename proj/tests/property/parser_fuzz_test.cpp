#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"
#include "vibeguard/error.hpp"
#include "vibeguard/syntax.hpp"

namespace {

using namespace vibeguard;
using vgtest::Gen;

// Appends the UTF-8 encoding of a scalar value.
void put_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

std::string random_utf8(Gen& g, std::size_t len) {
  std::string out;
  for (std::size_t i = 0; i < len; ++i) {
    char32_t cp;
    switch (g.below(4)) {
      case 0: cp = static_cast<char32_t>(g.below(0x80)); break;
      case 1: cp = static_cast<char32_t>(0x80 + g.below(0x800 - 0x80)); break;
      case 2: {
        cp = static_cast<char32_t>(0x800 + g.below(0x10000 - 0x800));
        if (cp >= 0xD800 && cp <= 0xDFFF) cp = 0x2713;
        break;
      }
      default: cp = static_cast<char32_t>(0x10000 + g.below(0x110000 - 0x10000)); break;
    }
    put_utf8(out, cp);
  }
  return out;
}

std::string token_soup(Gen& g, std::size_t len) {
  static const std::vector<std::string> pieces = {
      "switch", "(", ")", "{", "}", "case", "'a'", ":", "return", ";", "default", "if", "else", "===", "!==",
      "type", "=", "|", "interface", "function", "=>", "const", "<Tag x=\"1\">", "</Tag>", "satisfies",
      "Record", "<", ">", ",", "`t ${", "}`", "/*", "*/", "//", "\n", " ", "import", "export", "from",
      "'./m'", "...", ".", "?", "x", "assertNever", "\"", "'", "`", "\\", "/re/g", "0x1f", "@", "#"};
  std::string out;
  for (std::size_t i = 0; i < len; ++i) out += g.pick(pieces) + (g.chance(0.5) ? " " : "");
  return out;
}

void check_invariants(const syntax::ParseResult& r, const std::string& input) {
  const auto& ast = r.ast;
  ASSERT_EQ(ast.text(), input);
  std::string joined;
  std::uint32_t expect_start = 0;
  for (const auto& t : ast.tokens()) {
    ASSERT_EQ(t.span.start, expect_start);
    joined.append(input, t.span.start, t.span.size());
    expect_start = t.span.end;
  }
  ASSERT_EQ(joined, input);
  for (const auto& n : ast.nodes()) {
    ASSERT_LE(n.span.start, n.span.end);
    ASSERT_LE(n.span.end, input.size());
    if (n.parent != syntax::kNoNode) ASSERT_TRUE(ast.node(n.parent).span.contains(n.span));
    // line/col agree with the offset.
    std::uint32_t line = 1, col = 1;
    for (std::uint32_t i = ast.line_start(ast.line_of(n.span.start)); i < n.span.start; ++i)
      if ((static_cast<unsigned char>(input[i]) & 0xC0) != 0x80) ++col;
    line = ast.line_of(n.span.start);
    ASSERT_EQ(n.span.line, line);
    ASSERT_EQ(n.span.col, col);
  }
}

TEST(ParserFuzz, NeverAbortsOnValidUtf8) {
  Gen g(vgtest::seed_or(0xfa22));
  for (int i = 0; i < 500; ++i) {
    const std::string input = random_utf8(g, g.below(200));
    syntax::ParseResult r;
    ASSERT_NO_THROW(r = syntax::parse_file(g.chance(0.5) ? "f.ts" : "f.tsx", input)) << i;
    check_invariants(r, input);
  }
}

TEST(ParserFuzz, TokenSoupStaysLossless) {
  Gen g(vgtest::seed_or(0x50f));
  for (int i = 0; i < 1000; ++i) {
    const std::string input = token_soup(g, g.below(80));
    syntax::ParseResult r;
    ASSERT_NO_THROW(r = syntax::parse_file(g.chance(0.5) ? "f.ts" : "f.tsx", input)) << input;
    check_invariants(r, input);
  }
}

TEST(ParserFuzz, InvalidUtf8IsRejected) {
  Gen g(vgtest::seed_or(0xbad));
  for (int i = 0; i < 200; ++i) {
    std::string input = random_utf8(g, g.below(20));
    const std::string bad = g.pick(std::vector<std::string>{"\x80", "\xC0\xAF", "\xED\xA0\x80", "\xF8\x88\x80\x80",
                                                            "\xE2\x82", "\xFF"});
    input.insert(g.below(input.size() + 1), bad);
    try {
      syntax::parse_file("f.ts", input);
      FAIL() << "accepted invalid UTF-8 at case " << i;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidEncoding);
    }
  }
}

}  // namespace
