#include <algorithm>

#include "vibeguard/error.hpp"
#include "vibeguard/syntax.hpp"

namespace vibeguard::syntax {

SourceAst::SourceAst(std::string path, std::string text, std::vector<Node> nodes,
                     std::vector<Token> tokens, std::vector<std::uint32_t> line_starts)
    : path_(std::move(path)),
      text_(std::move(text)),
      nodes_(std::move(nodes)),
      tokens_(std::move(tokens)),
      line_starts_(std::move(line_starts)) {}

std::string_view SourceAst::node_text(const Span& span) const {
  if (span.start > span.end || span.end > text_.size())
    throw Error(ErrorCode::SpanOutOfBounds, path_ + ": [" + std::to_string(span.start) + ", " +
                                                std::to_string(span.end) + ") exceeds " +
                                                std::to_string(text_.size()) + " bytes");
  return std::string_view(text_).substr(span.start, span.end - span.start);
}

std::uint32_t SourceAst::line_of(std::uint32_t offset) const {
  const auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), offset);
  return static_cast<std::uint32_t>(it - line_starts_.begin());
}

std::uint32_t SourceAst::line_start(std::uint32_t line) const {
  if (line == 0 || line_starts_.empty()) return 0;
  if (line > line_starts_.size()) return static_cast<std::uint32_t>(text_.size());
  return line_starts_[line - 1];
}

Span SourceAst::make_span(std::uint32_t start, std::uint32_t end) const {
  if (start > end || end > text_.size())
    throw Error(ErrorCode::SpanOutOfBounds, path_ + ": bad span");
  Span s{start, end, line_of(start), 1};
  std::uint32_t col = 1;
  for (std::uint32_t i = line_start(s.line); i < start; ++i)
    if ((static_cast<unsigned char>(text_[i]) & 0xC0) != 0x80) ++col;
  s.col = col;
  return s;
}

std::uint32_t SourceAst::offset_of(std::uint32_t line, std::uint32_t col) const {
  std::uint32_t p = line_start(line);
  const std::uint32_t line_end = line < line_starts_.size()
                                     ? line_starts_[line]
                                     : static_cast<std::uint32_t>(text_.size());
  for (std::uint32_t c = 1; c < col && p < line_end; ++c) {
    ++p;
    while (p < line_end && (static_cast<unsigned char>(text_[p]) & 0xC0) == 0x80) ++p;
  }
  return p;
}

bool is_valid_utf8(std::string_view s) noexcept {
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
      ++i;
      continue;
    }
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto d = static_cast<unsigned char>(s[i + k]);
      if ((d & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (d & 0x3F);
    }
    // overlong forms, surrogates, out of range
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) return false;
    if (cp >= 0xD800 && cp <= 0xDFFF) return false;
    if (cp > 0x10FFFF) return false;
    i += len;
  }
  return true;
}

bool is_function_like(NodeKind kind) noexcept {
  return kind == NodeKind::Function || kind == NodeKind::FunctionExpression ||
         kind == NodeKind::ArrowFunction;
}

bool is_type_kind(NodeKind kind) noexcept {
  switch (kind) {
    case NodeKind::UnionType:
    case NodeKind::LiteralType:
    case NodeKind::TypeReference:
    case NodeKind::ObjectType:
    case NodeKind::KeywordType:
    case NodeKind::OpaqueType:
      return true;
    default:
      return false;
  }
}

std::span<const NodeId> function_params(const SourceAst& ast, NodeId fn) {
  const auto& kids = ast.node(fn).children;
  std::size_t n = 0;
  while (n < kids.size() && ast.node(kids[n]).kind == NodeKind::Parameter) ++n;
  return std::span<const NodeId>(kids.data(), n);
}

NodeId function_body(const SourceAst& ast, NodeId fn) {
  const Node& n = ast.node(fn);
  if (!n.has(flags::kHasBody) || n.children.empty()) return kNoNode;
  const NodeId last = n.children.back();
  return ast.node(last).kind == NodeKind::Parameter ? kNoNode : last;
}

std::string member_path(const SourceAst& ast, NodeId expr) {
  const Node& n = ast.node(expr);
  switch (n.kind) {
    case NodeKind::Identifier:
      return n.name;
    case NodeKind::MemberAccess: {
      if (n.children.empty() || n.name.empty()) return {};
      std::string base = member_path(ast, n.children[0]);
      if (base.empty()) return {};
      return base + "." + n.name;
    }
    case NodeKind::Parenthesized:
    case NodeKind::NonNull:
      return n.children.empty() ? std::string{} : member_path(ast, n.children[0]);
    default:
      return {};
  }
}

std::string_view to_string(NodeKind kind) noexcept {
  switch (kind) {
    case NodeKind::Module: return "Module";
    case NodeKind::Import: return "Import";
    case NodeKind::ImportSpecifier: return "ImportSpecifier";
    case NodeKind::Export: return "Export";
    case NodeKind::ExportSpecifier: return "ExportSpecifier";
    case NodeKind::TypeAlias: return "TypeAlias";
    case NodeKind::Interface: return "Interface";
    case NodeKind::PropertySignature: return "PropertySignature";
    case NodeKind::Function: return "Function";
    case NodeKind::Parameter: return "Parameter";
    case NodeKind::ObjectPattern: return "ObjectPattern";
    case NodeKind::ArrayPattern: return "ArrayPattern";
    case NodeKind::Variable: return "Variable";
    case NodeKind::Declarator: return "Declarator";
    case NodeKind::Block: return "Block";
    case NodeKind::If: return "If";
    case NodeKind::Switch: return "Switch";
    case NodeKind::CaseClause: return "CaseClause";
    case NodeKind::DefaultClause: return "DefaultClause";
    case NodeKind::Return: return "Return";
    case NodeKind::Throw: return "Throw";
    case NodeKind::Break: return "Break";
    case NodeKind::Continue: return "Continue";
    case NodeKind::ExpressionStatement: return "ExpressionStatement";
    case NodeKind::EmptyStatement: return "EmptyStatement";
    case NodeKind::Loop: return "Loop";
    case NodeKind::Try: return "Try";
    case NodeKind::OpaqueStatement: return "OpaqueStatement";
    case NodeKind::UnionType: return "UnionType";
    case NodeKind::LiteralType: return "LiteralType";
    case NodeKind::TypeReference: return "TypeReference";
    case NodeKind::ObjectType: return "ObjectType";
    case NodeKind::KeywordType: return "KeywordType";
    case NodeKind::OpaqueType: return "OpaqueType";
    case NodeKind::Identifier: return "Identifier";
    case NodeKind::StringLiteral: return "StringLiteral";
    case NodeKind::NumberLiteral: return "NumberLiteral";
    case NodeKind::TemplateLiteral: return "TemplateLiteral";
    case NodeKind::RegexLiteral: return "RegexLiteral";
    case NodeKind::MemberAccess: return "MemberAccess";
    case NodeKind::ElementAccess: return "ElementAccess";
    case NodeKind::Call: return "Call";
    case NodeKind::New: return "New";
    case NodeKind::Binary: return "Binary";
    case NodeKind::Unary: return "Unary";
    case NodeKind::Conditional: return "Conditional";
    case NodeKind::Assignment: return "Assignment";
    case NodeKind::ObjectLiteral: return "ObjectLiteral";
    case NodeKind::Property: return "Property";
    case NodeKind::ShorthandProperty: return "ShorthandProperty";
    case NodeKind::Spread: return "Spread";
    case NodeKind::ArrayLiteral: return "ArrayLiteral";
    case NodeKind::FunctionExpression: return "FunctionExpression";
    case NodeKind::ArrowFunction: return "ArrowFunction";
    case NodeKind::Parenthesized: return "Parenthesized";
    case NodeKind::Satisfies: return "Satisfies";
    case NodeKind::As: return "As";
    case NodeKind::NonNull: return "NonNull";
    case NodeKind::Jsx: return "Jsx";
    case NodeKind::JsxAttribute: return "JsxAttribute";
    case NodeKind::JsxText: return "JsxText";
    case NodeKind::OpaqueExpression: return "OpaqueExpression";
  }
  return "?";
}

}  // namespace vibeguard::syntax
