#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vibeguard/index.hpp"

namespace vibeguard::index::detail {

using syntax::NodeId;
using syntax::kNoNode;

struct TypeExpr {
  enum class Kind : std::uint8_t { None, Ref, String, Literals, Object, Other };
  Kind kind = Kind::None;
  std::string name;                   // Ref
  std::vector<std::string> literals;  // Literals
  NodeId node = kNoNode;              // the type node (Object members, Ref args)
  Span span;
  friend bool operator==(const TypeExpr&, const TypeExpr&) = default;
};

struct PropDecl {
  std::string name;
  TypeExpr type;
  Span name_span;
  friend bool operator==(const PropDecl&, const PropDecl&) = default;
};

struct InterfaceDecl {
  std::string name;
  std::vector<PropDecl> props;
  bool exported = false;
  friend bool operator==(const InterfaceDecl&, const InterfaceDecl&) = default;
};

struct AliasDecl {
  std::string name;
  TypeExpr type;
  bool exported = false;
  Span span;
  friend bool operator==(const AliasDecl&, const AliasDecl&) = default;
};

struct ParamDecl {
  std::string name;  // empty for patterns
  TypeExpr type;
  Span name_span;
  friend bool operator==(const ParamDecl&, const ParamDecl&) = default;
};

struct FunctionDecl {
  std::string name;
  std::vector<ParamDecl> params;
  NodeId node = kNoNode;
  bool exported = false;
  friend bool operator==(const FunctionDecl&, const FunctionDecl&) = default;
};

struct ImportBinding {
  std::string local;
  std::string imported;  // "default", "*" or a name
  std::string specifier;
  friend bool operator==(const ImportBinding&, const ImportBinding&) = default;
};

struct ExportBinding {
  std::string exported;
  std::string local;      // name in this file, or in `from` when re-exporting
  std::string from;       // re-export specifier, empty for local exports
  friend bool operator==(const ExportBinding&, const ExportBinding&) = default;
};

/// Static type of a binding: the annotation plus property steps into it.
struct BindingType {
  TypeExpr base;
  std::vector<std::string> path;
  bool known = false;
  friend bool operator==(const BindingType&, const BindingType&) = default;
};

struct RawSwitch {
  SwitchSite site;        // resolved_union left empty
  BindingType subject;    // type of the discriminant expression
};

struct RawChain {
  ComparisonChain chain;  // subject_* left unresolved
  BindingType subject;
};

struct RawLiteral {
  std::string anchor;
  std::string callee;
  std::uint32_t arg_index = 0;
  std::string property;
  LiteralSite site;
};

/// Comparison of a function parameter against a string literal.
struct RawParamComparison {
  std::string function;
  std::string param;
  LiteralSite site;
};

struct RawObject {
  MappingLiteral mapping;                 // intent fields left empty
  std::optional<TypeExpr> annotation;     // declarator annotation
  std::optional<TypeExpr> satisfies_type; // innermost satisfies around it
  bool plain_keys = true;                 // no spread / computed keys
};

/// Everything derivable from one file's text alone.
struct FileFacts {
  std::string path;
  std::string text;
  std::shared_ptr<const syntax::SourceAst> ast;
  std::vector<syntax::Diagnostic> diagnostics;
  std::optional<std::string> failure;

  std::vector<UnionType> unions;
  std::vector<AliasDecl> aliases;        // every type alias, unions included
  std::vector<InterfaceDecl> interfaces;
  std::vector<FunctionDecl> functions;
  std::vector<ImportBinding> imports;
  std::vector<ExportBinding> exports;
  std::vector<std::string> star_exports;
  std::vector<std::string> top_level_names;

  std::vector<RawSwitch> switches;
  std::vector<RawChain> chains;
  std::vector<RawLiteral> literals;
  std::vector<RawParamComparison> param_comparisons;
  std::vector<RawObject> objects;
};

/// Results of resolving one file against the rest of the workspace.
struct LinkedFacts {
  std::vector<SwitchSite> switches;
  std::vector<ComparisonChain> chains;
  std::vector<ImportEdge> imports;
  /// Per RawObject: resolved explicit key union (annotation or guard).
  std::vector<std::optional<UnionKey>> object_annotation_union;
  std::vector<std::optional<UnionKey>> object_guard_union;
  std::vector<std::string> object_value_text;
  /// Every path consulted while linking (existing or not).
  std::vector<std::string> deps;
};

std::shared_ptr<const FileFacts> extract_facts(const std::string& path, const std::string& text,
                                               const syntax::ParseOptions& options);

TypeExpr type_expr(const syntax::SourceAst& ast, NodeId type_node);
std::vector<PropDecl> object_type_props(const syntax::SourceAst& ast, NodeId object_type);

std::string dirname(std::string_view path);

}  // namespace vibeguard::index::detail
