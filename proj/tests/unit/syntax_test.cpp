#include <gtest/gtest.h>

#include "test_support.hpp"
#include "vibeguard/error.hpp"
#include "vibeguard/syntax.hpp"

namespace {

using namespace vibeguard;
using syntax::NodeKind;

std::vector<syntax::NodeId> find_all(const syntax::SourceAst& ast, NodeKind kind) {
  std::vector<syntax::NodeId> out;
  syntax::walk(ast, ast.root(), [&](syntax::NodeId id, const syntax::Node& n) {
    if (n.kind == kind) out.push_back(id);
    return true;
  });
  return out;
}

std::string concat_tokens(const syntax::SourceAst& ast) {
  std::string out;
  for (const auto& t : ast.tokens()) out += ast.node_text(t.span);
  return out;
}

TEST(Syntax, CorpusFilesRoundTripThroughTokens) {
  for (const auto* name : {"listing1", "listing2", "message-type", "http-methods"}) {
    for (const auto& [path, text] : vgtest::read_corpus(name)) {
      const auto r = syntax::parse_file(path, text);
      EXPECT_EQ(concat_tokens(r.ast), text) << path;
      for (const auto& n : r.ast.nodes())
        if (n.parent != syntax::kNoNode) EXPECT_TRUE(r.ast.node(n.parent).span.contains(n.span)) << path;
    }
  }
}

TEST(Syntax, UnionAliasMembersInOrder) {
  const auto r = syntax::parse_file("a.ts", "export type S = 'pending' | \"paid\" | 'shi\\'pped';\n");
  EXPECT_TRUE(r.diagnostics.empty());
  const auto aliases = find_all(r.ast, NodeKind::TypeAlias);
  ASSERT_EQ(aliases.size(), 1u);
  const auto& alias = r.ast.node(aliases[0]);
  EXPECT_EQ(alias.name, "S");
  const auto& u = r.ast.node(alias.type);
  ASSERT_EQ(u.kind, NodeKind::UnionType);
  std::vector<std::string> members;
  for (auto c : u.children) members.push_back(r.ast.node(c).value);
  EXPECT_EQ(members, (std::vector<std::string>{"pending", "paid", "shi'pped"}));
}

TEST(Syntax, SwitchClausesAreChildren) {
  const auto r = syntax::parse_file("a.ts",
                                    "function f(x: T) {\n"
                                    "  switch (x) {\n"
                                    "    case 'a': return 1;\n"
                                    "    case 'b':\n"
                                    "    default: return assertNever(x);\n"
                                    "  }\n"
                                    "}\n");
  EXPECT_TRUE(r.diagnostics.empty());
  const auto switches = find_all(r.ast, NodeKind::Switch);
  ASSERT_EQ(switches.size(), 1u);
  const auto& sw = r.ast.node(switches[0]);
  ASSERT_EQ(sw.children.size(), 4u);
  EXPECT_EQ(r.ast.node(sw.children[1]).kind, NodeKind::CaseClause);
  EXPECT_EQ(r.ast.node(sw.children[2]).kind, NodeKind::CaseClause);
  EXPECT_EQ(r.ast.node(sw.children[2]).children.size(), 1u);  // fallthrough: test only
  EXPECT_EQ(r.ast.node(sw.children[3]).kind, NodeKind::DefaultClause);
  EXPECT_EQ(syntax::member_path(r.ast, sw.children[0]), "x");
}

TEST(Syntax, MemberPathFoldsOptionalChaining) {
  const auto r = syntax::parse_file("a.ts", "const v = a?.b.c;\nconst w = a[b].c;\nconst z = f().c;\n");
  std::vector<std::string> paths;
  for (auto id : find_all(r.ast, NodeKind::Declarator)) {
    const auto& d = r.ast.node(id);
    paths.push_back(syntax::member_path(r.ast, d.children.back()));
  }
  EXPECT_EQ(paths, (std::vector<std::string>{"a.b.c", "", ""}));
}

TEST(Syntax, ReducerCorpusRecoversWithWarnings) {
  const auto files = vgtest::read_corpus("listing2");
  const auto& text = files.at("reducer.ts");
  syntax::ParseResult r;
  ASSERT_NO_THROW(r = syntax::parse_file("reducer.ts", text));
  EXPECT_FALSE(r.diagnostics.empty());
  EXPECT_EQ(concat_tokens(r.ast), text);
  // The else-if chain is still recognized.
  EXPECT_GE(find_all(r.ast, NodeKind::If).size(), 3u);
}

TEST(Syntax, JsxIsOpaqueLeafInTsx) {
  const auto r = syntax::parse_file("a.tsx", "const x = <Badge color=\"Y\">Pending</Badge>;\nconst y = a < b;\n");
  const auto jsx = find_all(r.ast, NodeKind::Jsx);
  ASSERT_EQ(jsx.size(), 1u);
  EXPECT_EQ(r.ast.node(jsx[0]).name, "Badge");
  EXPECT_EQ(r.ast.node_text(jsx[0]), "<Badge color=\"Y\">Pending</Badge>");
  // Not JSX in a .ts file: `<` is a comparison there.
  const auto ts = syntax::parse_file("a.ts", "const y = a < b;\n");
  EXPECT_TRUE(find_all(ts.ast, NodeKind::Jsx).empty());
  EXPECT_EQ(find_all(ts.ast, NodeKind::Binary).size(), 1u);
}

TEST(Syntax, UnknownConstructsBecomeOpaque) {
  const std::string text = "class Foo { bar() { return 1; } }\nenum E { A, B }\nexport type T = 'a';\n";
  const auto r = syntax::parse_file("a.ts", text);
  EXPECT_EQ(concat_tokens(r.ast), text);
  EXPECT_FALSE(find_all(r.ast, NodeKind::OpaqueStatement).empty());
  EXPECT_EQ(find_all(r.ast, NodeKind::TypeAlias).size(), 1u);
}

TEST(Syntax, SatisfiesAndImports) {
  const auto r = syntax::parse_file(
      "a.ts", "import type { A, B as C } from './x';\nexport const t = { a: 1 } satisfies Record<A, number>;\n");
  const auto imports = find_all(r.ast, NodeKind::Import);
  ASSERT_EQ(imports.size(), 1u);
  EXPECT_EQ(r.ast.node(imports[0]).value, "./x");
  EXPECT_TRUE(r.ast.node(imports[0]).has(syntax::flags::kTypeOnly));
  const auto specs = find_all(r.ast, NodeKind::ImportSpecifier);
  ASSERT_EQ(specs.size(), 2u);
  EXPECT_EQ(r.ast.node(specs[1]).name, "C");
  EXPECT_EQ(r.ast.node(specs[1]).value, "B");
  EXPECT_EQ(find_all(r.ast, NodeKind::Satisfies).size(), 1u);
}

TEST(Syntax, LineAndColumnCountCodePoints) {
  const std::string text = "const é = 1;\n\tconst x = 'ü';\n";
  const auto r = syntax::parse_file("a.ts", text);
  const auto lits = find_all(r.ast, NodeKind::StringLiteral);
  ASSERT_EQ(lits.size(), 1u);
  const auto& s = r.ast.node(lits[0]).span;
  EXPECT_EQ(s.line, 2u);
  EXPECT_EQ(s.col, 12u);  // tab is one column
  EXPECT_EQ(r.ast.offset_of(2, 12), s.start);
  EXPECT_EQ(r.ast.make_span(s.start, s.end), s);
}

TEST(Syntax, NodeTextRejectsOutOfRangeSpans) {
  const auto r = syntax::parse_file("a.ts", "let x = 1;\n");
  try {
    r.ast.node_text(Span{0, 1000, 1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SpanOutOfBounds);
  }
}

TEST(Syntax, InputLimits) {
  syntax::ParseOptions o;
  o.max_bytes = 8;
  try {
    syntax::parse_file("a.ts", "let x = 1;\n", o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InputTooLarge);
  }
  try {
    syntax::parse_file("a.ts", "let x = '\xff';\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidEncoding);
  }
  EXPECT_TRUE(syntax::is_valid_utf8("ok ✓"));
  EXPECT_FALSE(syntax::is_valid_utf8("\xc0\xaf"));
}

TEST(Syntax, EmptyFile) {
  const auto r = syntax::parse_file("a.ts", "");
  EXPECT_TRUE(r.diagnostics.empty());
  EXPECT_EQ(r.ast.node(r.ast.root()).kind, NodeKind::Module);
  EXPECT_TRUE(r.ast.items().empty());
}

}  // namespace
