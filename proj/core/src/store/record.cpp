#include "vibeguard/record.hpp"

#include <array>

#include <nlohmann/json.hpp>

#include "vibeguard/error.hpp"
#include "vibeguard/util.hpp"

namespace vibeguard {

namespace {

constexpr std::array<std::string_view, 4> kKindNames = {"exhaustive_switch", "discriminated_union",
                                                        "union_alias", "satisfies_guard"};
constexpr std::array<std::string_view, 2> kBehaviorNames = {"cases-equal-members",
                                                            "assert-never-default"};
constexpr std::array<std::string_view, 5> kStatusNames = {"proposed", "accepted", "rejected", "soft",
                                                          "retired"};

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view text) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == text) return static_cast<E>(i);
  return std::nullopt;
}

void append_field(std::string& out, std::string_view field) {
  out += std::to_string(field.size());
  out += ':';
  out += field;
  out += ';';
}

nlohmann::json decl_json(const DeclRef& d) {
  return {{"path", d.path}, {"decl", d.decl}, {"name", d.name}};
}

DeclRef decl_from(const nlohmann::json& j) {
  return {j.at("path").get<std::string>(), j.at("decl").get<std::string>(),
          j.at("name").get<std::string>()};
}

nlohmann::json union_json(const index::UnionKey& k) { return {{"file", k.file}, {"name", k.name}}; }

index::UnionKey union_from(const nlohmann::json& j) {
  return {j.at("file").get<std::string>(), j.at("name").get<std::string>()};
}

nlohmann::json predicate_json(ScopeKind kind, const SpecPredicate& p) {
  nlohmann::json j = nlohmann::json::object();
  switch (kind) {
    case ScopeKind::ExhaustiveSwitch:
      j["union"] = p.union_ref ? union_json(*p.union_ref) : nlohmann::json(nullptr);
      j["behavior"] = to_string(p.behavior);
      j["discriminant"] = p.discriminant;
      break;
    case ScopeKind::DiscriminatedUnion:
      j["proposed_name"] = p.proposed_name;
      j["requested_name"] = p.requested_name;
      j["target_file"] = p.target_file;
      j["members"] = p.members;
      j["subject"] = p.subject;
      j["subject_decl"] = p.subject_decl ? decl_json(*p.subject_decl) : nlohmann::json(nullptr);
      j["rewrite_to_switch"] = p.rewrite_to_switch;
      break;
    case ScopeKind::UnionAlias: {
      j["proposed_name"] = p.proposed_name;
      j["requested_name"] = p.requested_name;
      j["target_file"] = p.target_file;
      j["members"] = p.members;
      auto sites = nlohmann::json::array();
      for (const auto& s : p.annotation_sites) sites.push_back(decl_json(s));
      j["annotation_sites"] = std::move(sites);
      break;
    }
    case ScopeKind::SatisfiesGuard:
      j["key_union"] = p.union_ref ? union_json(*p.union_ref) : nlohmann::json(nullptr);
      j["value_type"] = p.value_type;
      break;
  }
  return j;
}

SpecPredicate predicate_from(ScopeKind kind, const nlohmann::json& j) {
  SpecPredicate p;
  switch (kind) {
    case ScopeKind::ExhaustiveSwitch: {
      if (!j.at("union").is_null()) p.union_ref = union_from(j.at("union"));
      auto b = parse_behavior(j.at("behavior").get<std::string>());
      if (!b) throw Error(ErrorCode::StoreCorrupt, "unknown behavior");
      p.behavior = *b;
      p.discriminant = j.at("discriminant").get<std::string>();
      break;
    }
    case ScopeKind::DiscriminatedUnion:
      p.proposed_name = j.at("proposed_name").get<std::string>();
      p.requested_name = j.at("requested_name").get<std::string>();
      p.target_file = j.at("target_file").get<std::string>();
      p.members = j.at("members").get<std::vector<std::string>>();
      p.subject = j.at("subject").get<std::string>();
      if (!j.at("subject_decl").is_null()) p.subject_decl = decl_from(j.at("subject_decl"));
      p.rewrite_to_switch = j.at("rewrite_to_switch").get<bool>();
      break;
    case ScopeKind::UnionAlias:
      p.proposed_name = j.at("proposed_name").get<std::string>();
      p.requested_name = j.at("requested_name").get<std::string>();
      p.target_file = j.at("target_file").get<std::string>();
      p.members = j.at("members").get<std::vector<std::string>>();
      for (const auto& s : j.at("annotation_sites")) p.annotation_sites.push_back(decl_from(s));
      break;
    case ScopeKind::SatisfiesGuard:
      if (!j.at("key_union").is_null()) p.union_ref = union_from(j.at("key_union"));
      p.value_type = j.at("value_type").get<std::string>();
      break;
  }
  return p;
}

}  // namespace

std::string_view to_string(ScopeKind kind) noexcept { return kKindNames[static_cast<std::size_t>(kind)]; }
std::optional<ScopeKind> parse_scope_kind(std::string_view text) noexcept {
  return lookup<ScopeKind>(kKindNames, text);
}
std::string_view to_string(Behavior b) noexcept { return kBehaviorNames[static_cast<std::size_t>(b)]; }
std::optional<Behavior> parse_behavior(std::string_view text) noexcept {
  return lookup<Behavior>(kBehaviorNames, text);
}
std::string_view to_string(Status s) noexcept { return kStatusNames[static_cast<std::size_t>(s)]; }
std::optional<Status> parse_status(std::string_view text) noexcept {
  return lookup<Status>(kStatusNames, text);
}

bool transition_allowed(Status from, Status to) noexcept {
  if (to == Status::Retired) return from != Status::Retired;
  switch (from) {
    case Status::Proposed:
      return to == Status::Accepted || to == Status::Rejected || to == Status::Soft;
    case Status::Accepted:
      return to == Status::Soft;
    case Status::Soft:
      return to == Status::Accepted;
    case Status::Rejected:
    case Status::Retired:
      return false;
  }
  return false;
}

std::string predicate_key(ScopeKind kind, const SpecPredicate& p) {
  std::string out;
  switch (kind) {
    case ScopeKind::ExhaustiveSwitch:
      append_field(out, p.union_ref ? p.union_ref->file : "");
      append_field(out, p.union_ref ? p.union_ref->name : "");
      append_field(out, to_string(p.behavior));
      break;
    case ScopeKind::DiscriminatedUnion:
      append_field(out, p.subject);
      if (p.subject_decl) {
        append_field(out, p.subject_decl->path);
        append_field(out, p.subject_decl->decl);
        append_field(out, p.subject_decl->name);
      }
      for (const auto& m : p.members) append_field(out, m);
      break;
    case ScopeKind::UnionAlias:
      for (const auto& m : p.members) append_field(out, m);
      out += '|';
      for (const auto& s : p.annotation_sites) {
        append_field(out, s.path);
        append_field(out, s.decl);
        append_field(out, s.name);
      }
      break;
    case ScopeKind::SatisfiesGuard:
      append_field(out, p.union_ref ? p.union_ref->file : "");
      append_field(out, p.union_ref ? p.union_ref->name : "");
      break;
  }
  return out;
}

std::string compute_record_id(ScopeKind kind, const Anchor& anchor, const SpecPredicate& p) {
  std::string canonical = "vibeguard-record-v1;";
  append_field(canonical, to_string(kind));
  append_field(canonical, anchor.path);
  append_field(canonical, anchor.decl);
  append_field(canonical, anchor.locator);
  canonical += predicate_key(kind, p);
  return sha256_hex(canonical).substr(0, 16);
}

std::string overlap_key(const SpecRecord& r) {
  if (r.kind == ScopeKind::DiscriminatedUnion) {
    if (r.predicate.subject_decl) {
      const auto& d = *r.predicate.subject_decl;
      return "du|" + d.path + "|" + d.decl + "." + d.name;
    }
    return "du|" + r.anchor.path + "|" + r.predicate.subject;
  }
  return std::string(to_string(r.kind)) + "|" + r.anchor.key();
}

void to_json(nlohmann::json& j, const SpecRecord& r) {
  j = nlohmann::json{
      {"id", r.id},
      {"kind", to_string(r.kind)},
      {"status", to_string(r.status)},
      {"anchor",
       {{"path", r.anchor.path},
        {"decl", r.anchor.decl},
        {"locator", r.anchor.locator},
        {"start", r.anchor.start},
        {"end", r.anchor.end}}},
      {"predicate", predicate_json(r.kind, r.predicate)},
      {"explanation", r.explanation},
      {"created_at", r.created_at},
      {"decided_at", r.decided_at.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.decided_at)},
      {"decided_by", r.decided_by.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.decided_by)},
      {"provenance", {{"snapshot", r.provenance.snapshot}, {"detector_version", r.provenance.detector_version}}},
      {"unresolved_streak", r.unresolved_streak},
  };
}

void from_json(const nlohmann::json& j, SpecRecord& r) {
  try {
    r.id = j.at("id").get<std::string>();
    auto kind = parse_scope_kind(j.at("kind").get<std::string>());
    auto status = parse_status(j.at("status").get<std::string>());
    if (!kind || !status) throw Error(ErrorCode::StoreCorrupt, "record " + r.id + ": unknown kind or status");
    r.kind = *kind;
    r.status = *status;
    const auto& a = j.at("anchor");
    r.anchor.path = a.at("path").get<std::string>();
    r.anchor.decl = a.at("decl").get<std::string>();
    r.anchor.locator = a.at("locator").get<std::string>();
    r.anchor.start = a.at("start").get<std::uint32_t>();
    r.anchor.end = a.at("end").get<std::uint32_t>();
    r.predicate = predicate_from(r.kind, j.at("predicate"));
    r.explanation = j.at("explanation").get<std::string>();
    r.created_at = j.at("created_at").get<std::string>();
    r.decided_at = j.at("decided_at").is_null() ? "" : j.at("decided_at").get<std::string>();
    r.decided_by = j.value("decided_by", nlohmann::json(nullptr)).is_null()
                       ? ""
                       : j.at("decided_by").get<std::string>();
    r.provenance.snapshot = j.at("provenance").at("snapshot").get<std::string>();
    r.provenance.detector_version = j.at("provenance").at("detector_version").get<std::string>();
    r.unresolved_streak = j.value("unresolved_streak", 0u);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::StoreCorrupt, std::string("malformed record: ") + e.what());
  }
}

}  // namespace vibeguard
