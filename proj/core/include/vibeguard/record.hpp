#pragma once

// Specification records: one instantiated template (scope anchor + predicate)
// with its review status. Shared by the detectors, the store, the verifier and
// the fix generator.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vibeguard/index.hpp"

namespace vibeguard {

enum class ScopeKind : std::uint8_t { ExhaustiveSwitch, DiscriminatedUnion, UnionAlias, SatisfiesGuard };
std::string_view to_string(ScopeKind kind) noexcept;
std::optional<ScopeKind> parse_scope_kind(std::string_view text) noexcept;

enum class Behavior : std::uint8_t { CasesEqualMembers, AssertNeverDefault };
std::string_view to_string(Behavior behavior) noexcept;
std::optional<Behavior> parse_behavior(std::string_view text) noexcept;

enum class Status : std::uint8_t { Proposed, Accepted, Rejected, Soft, Retired };
std::string_view to_string(Status status) noexcept;
std::optional<Status> parse_status(std::string_view text) noexcept;

/// proposed -> {accepted, rejected, soft}, accepted <-> soft, any -> retired.
bool transition_allowed(Status from, Status to) noexcept;

/// Durable scope location. `locator` names the construct inside `decl`
/// ("switch:order.status#0", "chain:action.type#0", "call:processMessage#0",
/// "mapping:handlers") so the anchor survives code motion.
struct Anchor {
  std::string path;
  std::string decl;
  std::string locator;
  std::uint32_t start = 0;
  std::uint32_t end = 0;

  std::string key() const { return path + "|" + decl + "|" + locator; }
  friend bool operator==(const Anchor&, const Anchor&) = default;
};

/// A declaration slot (parameter or property) named by its owner.
struct DeclRef {
  std::string path;
  std::string decl;
  std::string name;
  friend auto operator<=>(const DeclRef&, const DeclRef&) = default;
};

struct SpecPredicate {
  // exhaustive_switch, satisfies_guard
  std::optional<index::UnionKey> union_ref;
  Behavior behavior = Behavior::AssertNeverDefault;
  std::string discriminant;

  // discriminated_union, union_alias
  std::string proposed_name;
  std::string requested_name;  // before collision suffixing
  std::string target_file;     // where the union declaration goes
  std::vector<std::string> members;

  // discriminated_union
  std::string subject;
  std::optional<DeclRef> subject_decl;
  bool rewrite_to_switch = false;

  // union_alias
  std::vector<DeclRef> annotation_sites;

  // satisfies_guard
  std::string value_type;

  friend bool operator==(const SpecPredicate&, const SpecPredicate&) = default;
};

struct Provenance {
  std::string snapshot;
  std::string detector_version;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct SpecRecord {
  std::string id;
  ScopeKind kind = ScopeKind::ExhaustiveSwitch;
  Status status = Status::Proposed;
  Anchor anchor;
  SpecPredicate predicate;
  std::string explanation;
  std::string created_at;
  std::string decided_at;
  std::string decided_by;
  Provenance provenance;
  std::uint32_t unresolved_streak = 0;

  friend bool operator==(const SpecRecord&, const SpecRecord&) = default;
};

/// Canonical text of the identity-bearing predicate fields (member sets,
/// union references, behavior). Names and explanations are excluded.
std::string predicate_key(ScopeKind kind, const SpecPredicate& predicate);

/// Content hash over kind, anchor (path, decl, locator) and predicate_key.
std::string compute_record_id(ScopeKind kind, const Anchor& anchor, const SpecPredicate& predicate);

/// Key under which two records target the same thing: the subject
/// declaration for discriminated unions, the anchor otherwise.
std::string overlap_key(const SpecRecord& record);

void to_json(nlohmann::json& j, const SpecRecord& record);
/// Throws Error{StoreCorrupt} on malformed input.
void from_json(const nlohmann::json& j, SpecRecord& record);

}  // namespace vibeguard
