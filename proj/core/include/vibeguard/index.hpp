#pragma once

// Cross-file model of a workspace: unions, switch sites, comparison chains,
// literal families and finite-key object literals.
//
// A CodebaseIndex is an immutable snapshot. Per-file parse results and facts
// are shared between snapshots; update_index only re-parses changed files and
// re-links files whose resolution consulted a changed path.

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vibeguard/span.hpp"
#include "vibeguard/syntax.hpp"

namespace vibeguard::index {

enum class DefaultKind : std::uint8_t { None, Plain, AssertNever };
std::string_view to_string(DefaultKind kind) noexcept;

struct UnionKey {
  std::string file;
  std::string name;
  friend auto operator<=>(const UnionKey&, const UnionKey&) = default;
};

struct UnionType {
  std::string name;
  std::vector<std::string> members;  // declaration order, distinct
  Span decl_span;
  bool exported = false;
  std::string defining_file;

  UnionKey key() const { return {defining_file, name}; }
  friend bool operator==(const UnionType&, const UnionType&) = default;
};

struct SwitchSite {
  std::string file;
  Span span;
  syntax::NodeId node = syntax::kNoNode;
  std::string discriminant;  // canonical member path; empty if not a path
  Span discriminant_span;
  std::optional<UnionKey> resolved_union;
  std::vector<std::string> cases;  // string-literal labels, source order
  bool has_non_literal_case = false;
  DefaultKind default_kind = DefaultKind::None;
  std::string enclosing_decl;
  std::uint32_t ordinal = 0;  // among same-discriminant switches in the decl
  friend bool operator==(const SwitchSite&, const SwitchSite&) = default;
};

enum class SubjectType : std::uint8_t { Absent, String, Union, Other };
std::string_view to_string(SubjectType type) noexcept;

/// Where a property's type is declared (interface or object type member).
struct PropertyRef {
  std::string file;
  std::string container;  // interface / alias name, empty for inline types
  std::string property;
  Span name_span;
  Span type_span;  // empty when unannotated
  friend bool operator==(const PropertyRef&, const PropertyRef&) = default;
};

struct ComparisonArm {
  std::string value;
  bool negated = false;
  syntax::NodeId if_node = syntax::kNoNode;
  Span test_span;
  friend bool operator==(const ComparisonArm&, const ComparisonArm&) = default;
};

struct ComparisonChain {
  std::string file;
  Span root_span;
  syntax::NodeId root_node = syntax::kNoNode;
  std::string subject;
  std::vector<std::string> observed_values;  // first-seen order
  std::vector<ComparisonArm> arms;
  bool has_terminal_else_or_fallthrough = false;
  bool has_terminal_else = false;
  bool has_negated = false;
  bool mixed_predicates = false;  // some arm tests something else
  SubjectType subject_type = SubjectType::Absent;
  std::optional<PropertyRef> subject_decl;
  std::optional<UnionKey> subject_union;
  std::string enclosing_decl;
  std::uint32_t ordinal = 0;
  friend bool operator==(const ComparisonChain&, const ComparisonChain&) = default;
};

enum class SiteContext : std::uint8_t { CallArgument, PropertyValue, Comparison };
std::string_view to_string(SiteContext context) noexcept;

struct LiteralSite {
  std::string file;
  Span span;
  SiteContext context = SiteContext::CallArgument;
  std::string literal;
  friend bool operator==(const LiteralSite&, const LiteralSite&) = default;
};

/// A declaration that should carry the family's union type.
struct AnnotationSite {
  std::string file;
  std::string decl;   // enclosing function / interface name
  std::string name;   // parameter or property name
  Span name_span;
  Span type_span;     // existing annotation; empty when absent
  friend bool operator==(const AnnotationSite&, const AnnotationSite&) = default;
};

struct LiteralFamily {
  std::string anchor;  // "call:<callee>#<index>" or "prop:<name>"
  std::vector<std::string> literals;
  std::vector<LiteralSite> sites;
  std::vector<AnnotationSite> annotation_sites;
  std::string home_file;  // where a new union declaration belongs
  std::string callee;     // call anchors
  std::uint32_t arg_index = 0;
  std::string param_name;
  std::string property;   // prop anchors
  friend bool operator==(const LiteralFamily&, const LiteralFamily&) = default;
};

struct MappingLiteral {
  std::string file;
  Span span;
  syntax::NodeId node = syntax::kNoNode;
  std::vector<std::string> keys;
  std::optional<UnionKey> intended_key_union;
  bool has_satisfies_guard = false;
  bool explicit_annotation = false;
  std::string value_type_text;  // empty when no annotation names one
  std::string decl_name;
  /// End of the guarded expression, where a guard is appended.
  std::uint32_t insert_at = 0;
  friend bool operator==(const MappingLiteral&, const MappingLiteral&) = default;
};

struct ImportEdge {
  std::string symbol;
  std::string source_file;
  friend bool operator==(const ImportEdge&, const ImportEdge&) = default;
};

struct IndexOptions {
  std::size_t family_min_size = 3;
  std::size_t family_min_sites = 2;
  syntax::ParseOptions parse;
};

struct IndexStats {
  std::size_t reparsed = 0;
  std::size_t relinked = 0;
};

namespace detail {
struct FileFacts;
struct LinkedFacts;
}  // namespace detail

class CodebaseIndex {
 public:
  CodebaseIndex();

  std::vector<std::string> paths() const;
  bool contains(const std::string& path) const;
  const syntax::SourceAst* ast(const std::string& path) const;
  std::string_view text(const std::string& path) const;
  const std::vector<syntax::Diagnostic>& diagnostics(const std::string& path) const;
  /// Error message for files that failed to parse (encoding, size).
  std::optional<std::string> failure(const std::string& path) const;

  const std::vector<UnionType>& unions() const noexcept { return unions_; }
  const UnionType* find_union(const UnionKey& key) const;
  const std::vector<SwitchSite>& switch_sites() const noexcept { return switches_; }
  const std::vector<ComparisonChain>& comparison_chains() const noexcept { return chains_; }
  const std::vector<LiteralFamily>& literal_families() const noexcept { return families_; }
  const std::vector<MappingLiteral>& mapping_literals() const noexcept { return mappings_; }
  const std::map<std::string, std::vector<ImportEdge>>& import_graph() const noexcept {
    return imports_;
  }
  /// Top-level declared names in a file (types, functions, variables, imports).
  std::vector<std::string> top_level_names(const std::string& path) const;

  /// Annotation slot of parameter `name` of function `decl`, or of property
  /// `name` of interface `decl`. nullopt when no such slot exists; the
  /// returned TypeSlot has an empty span when the slot is unannotated.
  struct TypeSlot {
    Span name_span;
    Span type_span;
    std::string type_text;
  };
  std::optional<TypeSlot> find_slot(const std::string& path, const std::string& decl,
                                    const std::string& name) const;

  const IndexOptions& options() const noexcept { return options_; }
  const IndexStats& stats() const noexcept { return stats_; }

  /// Structural equality over analysis results (stats excluded).
  friend bool operator==(const CodebaseIndex& a, const CodebaseIndex& b);

 private:
  friend CodebaseIndex build_index(const std::map<std::string, std::string>&, const IndexOptions&);
  friend CodebaseIndex update_index(const CodebaseIndex&,
                                    const std::map<std::string, std::optional<std::string>>&);
  friend std::optional<UnionType> resolve_union(const CodebaseIndex&, const std::string&,
                                                const std::string&);
  friend class Linker;

  void relink(const std::vector<std::string>& dirty);
  void aggregate();

  IndexOptions options_;
  std::map<std::string, std::shared_ptr<const detail::FileFacts>> files_;
  std::map<std::string, std::shared_ptr<const detail::LinkedFacts>> linked_;
  std::vector<UnionType> unions_;
  std::vector<SwitchSite> switches_;
  std::vector<ComparisonChain> chains_;
  std::vector<LiteralFamily> families_;
  std::vector<MappingLiteral> mappings_;
  std::map<std::string, std::vector<ImportEdge>> imports_;
  IndexStats stats_;
};

CodebaseIndex build_index(const std::map<std::string, std::string>& files,
                          const IndexOptions& options = {});

/// `changed` maps path to new text, or nullopt for deletion.
CodebaseIndex update_index(const CodebaseIndex& index,
                           const std::map<std::string, std::optional<std::string>>& changed);

std::optional<UnionType> resolve_union(const CodebaseIndex& index, const std::string& name,
                                       const std::string& from_file);

/// String literals accepted by argument `arg_index` of function `callee` as
/// seen from `from_file`, when that parameter is typed by a literal union.
/// nullopt for unresolved callees and unconstrained parameters.
std::optional<std::vector<std::string>> parameter_literals(const CodebaseIndex& index, const std::string& from_file,
                                                          const std::string& callee, std::size_t arg_index);

/// Every .ts/.tsx file under `root` keyed by normalized relative path.
/// Skips node_modules and dot-directories. Throws Error{WorkspaceUnreadable}.
std::map<std::string, std::string> read_source_tree(const std::string& root);

/// Lexical path normalization ("a/./b/../c" -> "a/c").
std::string normalize_path(std::string_view path);

}  // namespace vibeguard::index
