#pragma once

// Lossless parser for the TypeScript subset the analyzers need.
//
// The tree is an arena of generic nodes addressed by NodeId. Layouts per kind
// are listed next to NodeKind; anything outside the subset becomes an Opaque*
// node with a warning instead of aborting the parse.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vibeguard/span.hpp"

namespace vibeguard::syntax {

enum class TokenKind : std::uint8_t {
  Whitespace,
  LineComment,
  BlockComment,
  Identifier,  // includes keywords
  String,
  Template,
  Number,
  Regex,
  Punct,
  Jsx,  // one opaque token per JSX element
  Unknown,
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  Span span;

  bool is_trivia() const noexcept {
    return kind == TokenKind::Whitespace || kind == TokenKind::LineComment ||
           kind == TokenKind::BlockComment;
  }
  friend bool operator==(const Token&, const Token&) = default;
};

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

// Child layouts (`type` is the annotation slot, kNoNode when absent):
//   Module            children: items
//   Import            value: module specifier; children: ImportSpecifier
//   ImportSpecifier   name: local binding; value: imported name ("default", "*")
//   Export            value: specifier or ""; children: ExportSpecifier, or the
//                     default-exported expression when kDefault is set
//   ExportSpecifier   name: exported name; value: local name
//   TypeAlias         name; type
//   Interface         name; children: PropertySignature | OpaqueType
//   PropertySignature name; type; kOptional
//   Function / FunctionExpression / ArrowFunction
//                     name; type: return type; children: Parameter..., body
//                     (body present iff kHasBody; arrow bodies may be exprs)
//   Parameter         name (empty for patterns); type; children: binding[, init]
//   ObjectPattern     children: Identifier (name: local, value: property key)
//   Variable          kConst/kLet/kVar; children: Declarator
//   Declarator        name (empty for patterns); type; children: binding[, init]
//   Block             children: statements
//   If                children: condition, consequent[, alternate]
//   Switch            children: discriminant, CaseClause|DefaultClause...
//   CaseClause        children: test, statements...
//   DefaultClause     children: statements
//   Return/Throw      children: [expr]
//   ExpressionStatement children: expr
//   Loop              children: [condition,] body
//   Try               children: blocks
//   UnionType         children: member types
//   LiteralType       value: decoded literal; kStringKey when a string
//   TypeReference     name: dotted name; children: type arguments
//   ObjectType        children: PropertySignature | OpaqueType
//   KeywordType       name
//   Identifier        name (value: property key inside ObjectPattern)
//   StringLiteral     value: decoded contents
//   MemberAccess      name: property; children: object; kOptional for ?.
//   ElementAccess     children: object, index
//   Call / New        children: callee, args...
//   Binary            value: operator; children: lhs, rhs
//   Unary             value: operator; children: operand; kPostfix
//   Conditional       children: test, then, else
//   Assignment        value: operator; children: target, value
//   ObjectLiteral     children: Property | ShorthandProperty | Spread
//   Property          name: key; children: value (computed: key expr, value)
//   Spread            children: [expr]
//   Satisfies / As    children: expr; type
//   Jsx               name: tag; children: JsxAttribute..., JsxText...
//   JsxAttribute      name; children: [StringLiteral | OpaqueExpression]
enum class NodeKind : std::uint8_t {
  Module,
  Import,
  ImportSpecifier,
  Export,
  ExportSpecifier,
  TypeAlias,
  Interface,
  PropertySignature,
  Function,
  Parameter,
  ObjectPattern,
  ArrayPattern,
  Variable,
  Declarator,
  Block,
  If,
  Switch,
  CaseClause,
  DefaultClause,
  Return,
  Throw,
  Break,
  Continue,
  ExpressionStatement,
  EmptyStatement,
  Loop,
  Try,
  OpaqueStatement,
  UnionType,
  LiteralType,
  TypeReference,
  ObjectType,
  KeywordType,
  OpaqueType,
  Identifier,
  StringLiteral,
  NumberLiteral,
  TemplateLiteral,
  RegexLiteral,
  MemberAccess,
  ElementAccess,
  Call,
  New,
  Binary,
  Unary,
  Conditional,
  Assignment,
  ObjectLiteral,
  Property,
  ShorthandProperty,
  Spread,
  ArrayLiteral,
  FunctionExpression,
  ArrowFunction,
  Parenthesized,
  Satisfies,
  As,
  NonNull,
  Jsx,
  JsxAttribute,
  JsxText,
  OpaqueExpression,
};

std::string_view to_string(NodeKind kind) noexcept;

namespace flags {
inline constexpr std::uint32_t kExported = 1u << 0;
inline constexpr std::uint32_t kDefault = 1u << 1;
inline constexpr std::uint32_t kOptional = 1u << 2;
inline constexpr std::uint32_t kAsync = 1u << 3;
inline constexpr std::uint32_t kConst = 1u << 4;
inline constexpr std::uint32_t kLet = 1u << 5;
inline constexpr std::uint32_t kVar = 1u << 6;
inline constexpr std::uint32_t kTypeOnly = 1u << 7;
inline constexpr std::uint32_t kHasBody = 1u << 8;
inline constexpr std::uint32_t kPostfix = 1u << 9;
inline constexpr std::uint32_t kComputed = 1u << 10;
inline constexpr std::uint32_t kStringKey = 1u << 11;
inline constexpr std::uint32_t kStar = 1u << 12;
inline constexpr std::uint32_t kStraySemicolon = 1u << 13;
inline constexpr std::uint32_t kRest = 1u << 14;
inline constexpr std::uint32_t kSelfClosing = 1u << 15;
}  // namespace flags

struct Node {
  NodeKind kind = NodeKind::OpaqueExpression;
  Span span;
  std::string name;
  std::string value;
  std::uint32_t flags = 0;
  NodeId type = kNoNode;
  NodeId parent = kNoNode;
  std::vector<NodeId> children;

  bool has(std::uint32_t flag) const noexcept { return (flags & flag) != 0; }
  friend bool operator==(const Node&, const Node&) = default;
};

struct Diagnostic {
  Span span;
  std::string message;
  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// Immutable parse tree for one file plus the full token/trivia stream.
class SourceAst {
 public:
  SourceAst() = default;
  SourceAst(std::string path, std::string text, std::vector<Node> nodes,
            std::vector<Token> tokens, std::vector<std::uint32_t> line_starts);

  const std::string& path() const noexcept { return path_; }
  std::string_view text() const noexcept { return text_; }

  NodeId root() const noexcept { return 0; }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  std::span<const Node> nodes() const noexcept { return nodes_; }
  std::span<const NodeId> items() const { return nodes_.at(0).children; }
  Span root_span() const { return nodes_.at(0).span; }

  /// Tokens and trivia in source order; their texts concatenate to text().
  std::span<const Token> tokens() const noexcept { return tokens_; }

  /// Exact source slice. Throws Error{SpanOutOfBounds}.
  std::string_view node_text(const Span& span) const;
  std::string_view node_text(NodeId id) const { return node_text(node(id).span); }

  /// Span for an arbitrary byte range with line/col filled in.
  Span make_span(std::uint32_t start, std::uint32_t end) const;
  std::uint32_t line_of(std::uint32_t offset) const;
  /// Byte offset of a 1-based (line, col) position, clamped to the line.
  std::uint32_t offset_of(std::uint32_t line, std::uint32_t col) const;
  std::uint32_t line_start(std::uint32_t line) const;

  friend bool operator==(const SourceAst&, const SourceAst&) = default;

 private:
  std::string path_;
  std::string text_;
  std::vector<Node> nodes_;
  std::vector<Token> tokens_;
  std::vector<std::uint32_t> line_starts_;
};

struct ParseOptions {
  std::size_t max_bytes = 8u * 1024u * 1024u;
  /// Overrides extension sniffing (.tsx/.jsx enable JSX).
  int jsx = -1;
};

struct ParseResult {
  SourceAst ast;
  std::vector<Diagnostic> diagnostics;
};

/// Throws Error{InvalidEncoding} for non-UTF-8 input and
/// Error{InputTooLarge} above `options.max_bytes`. Never throws otherwise.
ParseResult parse_file(std::string path, std::string source, const ParseOptions& options = {});

bool is_valid_utf8(std::string_view bytes) noexcept;

// Navigation helpers over the generic layout.
std::span<const NodeId> function_params(const SourceAst& ast, NodeId fn);
NodeId function_body(const SourceAst& ast, NodeId fn);
bool is_function_like(NodeKind kind) noexcept;
bool is_type_kind(NodeKind kind) noexcept;

/// `a.b.c` for identifier/member chains (optional chaining folded into `.`),
/// empty for anything else (computed access, calls, ...).
std::string member_path(const SourceAst& ast, NodeId expr);

/// Visits `id` and every descendant (annotation slots included) in pre-order.
template <typename Fn>
void walk(const SourceAst& ast, NodeId id, Fn&& fn) {
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    NodeId cur = stack.back();
    stack.pop_back();
    const Node& n = ast.node(cur);
    if (!fn(cur, n)) continue;
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
    if (n.type != kNoNode) stack.push_back(n.type);
  }
}

}  // namespace vibeguard::syntax
