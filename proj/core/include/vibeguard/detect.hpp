#pragma once

// The four template detectors and proposal of specification records.

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vibeguard/index.hpp"
#include "vibeguard/record.hpp"

namespace vibeguard::detect {

inline constexpr std::string_view kDetectorVersion = "1";

using Payload = std::variant<index::SwitchSite, index::ComparisonChain, index::LiteralFamily,
                             index::MappingLiteral>;

struct Scope {
  ScopeKind kind = ScopeKind::ExhaustiveSwitch;
  Anchor anchor;  // start/end equal the payload's primary span
  Payload payload;
};

/// Switch sites over a resolved union that neither cover every member nor
/// end in an assertNever default.
std::vector<Scope> detect_exhaustive_switch(const index::CodebaseIndex& index);
/// Comparison chains whose subject is typed `string` or not visibly typed.
std::vector<Scope> detect_discriminated_union(const index::CodebaseIndex& index);
std::vector<Scope> detect_union_alias(const index::CodebaseIndex& index);
std::vector<Scope> detect_satisfies_guard(const index::CodebaseIndex& index);
/// All four, in the order above.
std::vector<Scope> detect_all(const index::CodebaseIndex& index);

/// The template-1 predicate itself: Cases = Members, or an assertNever default.
bool switch_is_exhaustive(const std::vector<std::string>& cases, const std::vector<std::string>& members,
                          index::DefaultKind default_kind);

/// Members of `members` absent from `present`, in `members` order.
std::vector<std::string> missing_members(const std::vector<std::string>& members,
                                         const std::vector<std::string>& present);

/// Optional external hook that may rename proposed unions or reword
/// explanations. Member sets and scopes are never taken from it.
class SuggestionProvider {
 public:
  virtual ~SuggestionProvider() = default;
  virtual std::optional<std::string> union_name(const Scope& scope, std::string_view draft) const;
  virtual std::optional<std::string> explanation(const Scope& scope, std::string_view draft) const;
};

struct ProposeOptions {
  const SuggestionProvider* provider = nullptr;
  /// created_at for new records; empty means the current time.
  std::string now;
};

struct Proposal {
  std::vector<SpecRecord> records;
  /// Proposed union names that were suffixed to avoid an existing name.
  std::vector<std::string> name_collisions;
};

/// Records in `proposed` state. Ids are content hashes, so the same snapshot
/// always yields the same ids.
Proposal propose_specs(const index::CodebaseIndex& index, const std::vector<Scope>& scopes,
                       const ProposeOptions& options = {});

/// Digest over every (path, text) pair of the snapshot.
std::string snapshot_id(const index::CodebaseIndex& index);

bool is_identifier(std::string_view name) noexcept;

/// Uppercases the first character.
std::string capitalize(std::string_view word);

}  // namespace vibeguard::detect
