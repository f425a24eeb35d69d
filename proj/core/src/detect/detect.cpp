#include "vibeguard/detect.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "vibeguard/util.hpp"

namespace vibeguard::detect {

using index::CodebaseIndex;
using syntax::NodeKind;

namespace {

bool ordered(const Scope& a, const Scope& b) {
  if (a.anchor.path != b.anchor.path) return a.anchor.path < b.anchor.path;
  if (a.anchor.start != b.anchor.start) return a.anchor.start < b.anchor.start;
  return a.anchor.locator < b.anchor.locator;
}

void sort_scopes(std::vector<Scope>& scopes) { std::stable_sort(scopes.begin(), scopes.end(), ordered); }

std::string quoted_list(const std::vector<std::string>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += "'" + values[i] + "'";
  }
  return out;
}

std::string union_text(const std::vector<std::string>& members) {
  std::string out;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (i) out += " | ";
    out += "'" + members[i] + "'";
  }
  return out;
}

std::string where(const CodebaseIndex& idx, const std::string& path, std::uint32_t start) {
  const auto* ast = idx.ast(path);
  return path + ":" + std::to_string(ast ? ast->line_of(start) : 0);
}

// A default clause that only breaks or returns nothing.
bool default_is_trivial(const syntax::SourceAst& ast, syntax::NodeId sw) {
  for (auto c : ast.node(sw).children) {
    const auto& clause = ast.node(c);
    if (clause.kind != NodeKind::DefaultClause) continue;
    for (auto s : clause.children) {
      const auto& st = ast.node(s);
      if (st.kind == NodeKind::Break || st.kind == NodeKind::EmptyStatement) continue;
      if (st.kind == NodeKind::Return) {
        if (st.children.empty()) continue;
        const auto& e = ast.node(st.children[0]);
        if (e.kind == NodeKind::Identifier && (e.name == "undefined" || e.name == "null")) continue;
      }
      return false;
    }
    return true;
  }
  return true;
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    auto dot = path.find('.', pos);
    if (dot == std::string_view::npos) dot = path.size();
    if (dot > pos) out.emplace_back(path.substr(pos, dot - pos));
    pos = dot + 1;
  }
  return out;
}

bool ends_with_ci(std::string_view s, std::string_view suffix) {
  if (s.size() < suffix.size()) return false;
  for (std::size_t i = 0; i < suffix.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[s.size() - suffix.size() + i])) != suffix[i]) return false;
  return true;
}

std::string chain_union_name(const index::ComparisonChain& c) {
  if (c.subject_decl && !c.subject_decl->container.empty())
    return capitalize(c.subject_decl->container) + capitalize(c.subject_decl->property);
  auto parts = split_path(c.subject);
  if (parts.empty()) return "SubjectType";
  if (parts.size() == 1) return capitalize(parts[0]) + "Type";
  return capitalize(parts[parts.size() - 2]) + capitalize(parts.back());
}

std::string family_union_name(const index::LiteralFamily& f) {
  if (!f.callee.empty()) {
    std::string callee = f.callee.substr(f.callee.rfind('.') == std::string::npos ? 0 : f.callee.rfind('.') + 1);
    std::size_t i = 0;
    while (i < callee.size() && !std::isupper(static_cast<unsigned char>(callee[i]))) ++i;
    std::string stem = i < callee.size() ? callee.substr(i) : capitalize(callee);
    std::string tail = f.param_name.empty() ? "Value" : capitalize(f.param_name);
    if (stem.size() >= tail.size() && stem.compare(stem.size() - tail.size(), tail.size(), tail) == 0)
      return stem;
    return stem + tail;
  }
  if (ends_with_ci(f.property, "type") || ends_with_ci(f.property, "kind"))
    return capitalize(f.property) + "Value";
  return capitalize(f.property) + "Type";
}

std::string explain(const CodebaseIndex& idx, const Scope& scope, const SpecPredicate& p) {
  switch (scope.kind) {
    case ScopeKind::ExhaustiveSwitch: {
      const auto& site = std::get<index::SwitchSite>(scope.payload);
      const auto* u = idx.find_union(*site.resolved_union);
      auto missing = u ? missing_members(u->members, site.cases) : std::vector<std::string>{};
      std::string text = "The switch over `" + site.discriminant + "` in " + site.enclosing_decl + " (" +
                         where(idx, site.file, site.span.start) + ") does not handle every member of " +
                         site.resolved_union->name + ".";
      if (!missing.empty()) text += " Missing: " + quoted_list(missing) + ".";
      if (site.default_kind == index::DefaultKind::Plain)
        text += " Its plain default silently absorbs new members.";
      if (p.behavior == Behavior::AssertNeverDefault)
        text += " Require a default clause `default: return assertNever(" + site.discriminant +
                ");` so that unhandled members fail to compile.";
      else
        text += " Require one case per member of " + site.resolved_union->name + ".";
      return text;
    }
    case ScopeKind::DiscriminatedUnion: {
      const auto& c = std::get<index::ComparisonChain>(scope.payload);
      std::string text = "`" + c.subject + "` in " + c.enclosing_decl + " (" +
                         where(idx, c.file, c.root_span.start) +
                         ") is compared against the string values " + quoted_list(p.members) + ".";
      text += " Declare `type " + p.proposed_name + " = " + union_text(p.members) + "`";
      if (p.subject_decl)
        text += ", annotate " + p.subject_decl->decl + "." + p.subject_decl->name + " with it";
      text += " and replace the comparisons with a switch over " + p.proposed_name + ".";
      return text;
    }
    case ScopeKind::UnionAlias: {
      const auto& f = std::get<index::LiteralFamily>(scope.payload);
      std::string text = "The strings " + quoted_list(p.members);
      if (!f.callee.empty())
        text += " are passed as argument " + std::to_string(f.arg_index + 1) + " of " + f.callee;
      else
        text += " are used as values of property `" + f.property + "`";
      text += " at " + std::to_string(f.sites.size()) + " sites. Declare `type " + p.proposed_name + " = " +
              union_text(p.members) + "`";
      for (std::size_t i = 0; i < p.annotation_sites.size(); ++i) {
        const auto& s = p.annotation_sites[i];
        text += (i == 0 ? " and annotate " : ", ") + s.decl + "." + s.name;
      }
      text += p.annotation_sites.empty() ? "." : " with " + p.proposed_name + ".";
      return text;
    }
    case ScopeKind::SatisfiesGuard: {
      const auto& m = std::get<index::MappingLiteral>(scope.payload);
      const auto* u = idx.find_union(*m.intended_key_union);
      auto missing = u ? missing_members(u->members, m.keys) : std::vector<std::string>{};
      std::string v = p.value_type.empty() ? "unknown" : p.value_type;
      std::string text = "Object `" + m.decl_name + "` (" + where(idx, m.file, m.span.start) +
                         ") maps keys of " + m.intended_key_union->name + ".";
      if (!missing.empty()) text += " Missing keys: " + quoted_list(missing) + ".";
      text += " Append `satisfies Record<" + m.intended_key_union->name + ", " + v +
              ">` so missing or extra keys fail to compile.";
      return text;
    }
  }
  return {};
}

// Names an explanation must mention: the union or family name and every
// missing or proposed member.
std::vector<std::string> required_mentions(const CodebaseIndex& idx, const Scope& scope,
                                           const SpecPredicate& p) {
  std::vector<std::string> out;
  auto add_members = [&](const std::vector<std::string>& ms) {
    for (const auto& m : ms) out.push_back("'" + m + "'");
  };
  switch (scope.kind) {
    case ScopeKind::ExhaustiveSwitch: {
      const auto& site = std::get<index::SwitchSite>(scope.payload);
      out.push_back(site.resolved_union->name);
      if (const auto* u = idx.find_union(*site.resolved_union)) add_members(missing_members(u->members, site.cases));
      break;
    }
    case ScopeKind::DiscriminatedUnion:
    case ScopeKind::UnionAlias:
      out.push_back(p.proposed_name);
      add_members(p.members);
      break;
    case ScopeKind::SatisfiesGuard: {
      const auto& m = std::get<index::MappingLiteral>(scope.payload);
      out.push_back(m.intended_key_union->name);
      if (const auto* u = idx.find_union(*m.intended_key_union)) add_members(missing_members(u->members, m.keys));
      break;
    }
  }
  return out;
}

}  // namespace

std::string capitalize(std::string_view word) {
  std::string out(word);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

bool is_identifier(std::string_view name) noexcept {
  if (name.empty()) return false;
  auto head = static_cast<unsigned char>(name[0]);
  if (!(std::isalpha(head) || head == '_' || head == '$')) return false;
  return std::all_of(name.begin(), name.end(), [](char ch) {
    auto c = static_cast<unsigned char>(ch);
    return std::isalnum(c) || c == '_' || c == '$';
  });
}

bool switch_is_exhaustive(const std::vector<std::string>& cases, const std::vector<std::string>& members,
                          index::DefaultKind default_kind) {
  if (default_kind == index::DefaultKind::AssertNever) return true;
  return std::set<std::string>(cases.begin(), cases.end()) ==
         std::set<std::string>(members.begin(), members.end());
}

std::vector<std::string> missing_members(const std::vector<std::string>& members,
                                         const std::vector<std::string>& present) {
  std::set<std::string> have(present.begin(), present.end());
  std::vector<std::string> out;
  for (const auto& m : members)
    if (!have.count(m)) out.push_back(m);
  return out;
}

std::vector<Scope> detect_exhaustive_switch(const CodebaseIndex& idx) {
  std::vector<Scope> out;
  for (const auto& site : idx.switch_sites()) {
    if (!site.resolved_union || site.has_non_literal_case) continue;
    const auto* u = idx.find_union(*site.resolved_union);
    if (!u || switch_is_exhaustive(site.cases, u->members, site.default_kind)) continue;
    Scope s;
    s.kind = ScopeKind::ExhaustiveSwitch;
    s.anchor = {site.file, site.enclosing_decl,
                "switch:" + site.discriminant + "#" + std::to_string(site.ordinal), site.span.start,
                site.span.end};
    s.payload = site;
    out.push_back(std::move(s));
  }
  sort_scopes(out);
  return out;
}

std::vector<Scope> detect_discriminated_union(const CodebaseIndex& idx) {
  std::vector<Scope> out;
  for (const auto& c : idx.comparison_chains()) {
    if (c.subject_type != index::SubjectType::String && c.subject_type != index::SubjectType::Absent) continue;
    Scope s;
    s.kind = ScopeKind::DiscriminatedUnion;
    s.anchor = {c.file, c.enclosing_decl, "chain:" + c.subject + "#" + std::to_string(c.ordinal),
                c.root_span.start, c.root_span.end};
    s.payload = c;
    out.push_back(std::move(s));
  }
  sort_scopes(out);
  return out;
}

std::vector<Scope> detect_union_alias(const CodebaseIndex& idx) {
  std::vector<Scope> out;
  for (const auto& f : idx.literal_families()) {
    if (f.sites.empty()) continue;
    Scope s;
    s.kind = ScopeKind::UnionAlias;
    const auto& first = f.sites.front();
    s.anchor = {first.file, f.callee.empty() ? f.property : f.callee, f.anchor, first.span.start,
                first.span.end};
    s.payload = f;
    out.push_back(std::move(s));
  }
  sort_scopes(out);
  return out;
}

std::vector<Scope> detect_satisfies_guard(const CodebaseIndex& idx) {
  std::vector<Scope> out;
  for (const auto& m : idx.mapping_literals()) {
    if (m.has_satisfies_guard || !m.intended_key_union) continue;
    Scope s;
    s.kind = ScopeKind::SatisfiesGuard;
    s.anchor = {m.file, m.decl_name, "mapping:" + m.decl_name, m.span.start, m.span.end};
    s.payload = m;
    out.push_back(std::move(s));
  }
  sort_scopes(out);
  return out;
}

std::vector<Scope> detect_all(const CodebaseIndex& idx) {
  std::vector<Scope> out = detect_exhaustive_switch(idx);
  for (auto* fn : {&detect_discriminated_union, &detect_union_alias, &detect_satisfies_guard}) {
    auto more = fn(idx);
    out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  }
  return out;
}

std::optional<std::string> SuggestionProvider::union_name(const Scope&, std::string_view) const {
  return std::nullopt;
}
std::optional<std::string> SuggestionProvider::explanation(const Scope&, std::string_view) const {
  return std::nullopt;
}

std::string snapshot_id(const CodebaseIndex& idx) {
  std::string canonical;
  for (const auto& p : idx.paths()) {
    auto text = idx.text(p);
    canonical += std::to_string(p.size()) + ":" + p + std::to_string(text.size()) + ":";
    canonical.append(text);
  }
  return sha256_hex(canonical).substr(0, 16);
}

Proposal propose_specs(const CodebaseIndex& idx, const std::vector<Scope>& scopes,
                       const ProposeOptions& options) {
  Proposal result;
  const std::string now = options.now.empty() ? rfc3339_now() : options.now;
  const std::string snapshot = snapshot_id(idx);

  // Names handed out in this batch: (file, name) -> members. Identical
  // member sets share a name; different sets get a suffix.
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> taken;

  auto choose_name = [&](const Scope& scope, const std::string& file, std::string requested,
                         const std::vector<std::string>& members, SpecPredicate& p) {
    if (options.provider) {
      if (auto alt = options.provider->union_name(scope, requested); alt && is_identifier(*alt))
        requested = *alt;
    }
    auto existing = idx.top_level_names(file);
    std::set<std::string> names(existing.begin(), existing.end());
    std::string name = requested;
    for (int n = 2;; ++n) {
      auto it = taken.find({file, name});
      if (it != taken.end()) {
        if (it->second == members) break;
      } else if (!names.count(name)) {
        break;
      }
      name = requested + std::to_string(n);
    }
    taken[{file, name}] = members;
    p.requested_name = requested;
    p.proposed_name = name;
    if (name != requested) result.name_collisions.push_back(file + ":" + requested);
  };

  for (const auto& scope : scopes) {
    SpecPredicate p;
    switch (scope.kind) {
      case ScopeKind::ExhaustiveSwitch: {
        const auto& site = std::get<index::SwitchSite>(scope.payload);
        p.union_ref = site.resolved_union;
        p.discriminant = site.discriminant;
        p.behavior = Behavior::AssertNeverDefault;
        if (site.default_kind == index::DefaultKind::Plain) {
          const auto* ast = idx.ast(site.file);
          if (ast && !default_is_trivial(*ast, site.node)) p.behavior = Behavior::CasesEqualMembers;
        }
        break;
      }
      case ScopeKind::DiscriminatedUnion: {
        const auto& c = std::get<index::ComparisonChain>(scope.payload);
        p.members = c.observed_values;
        p.subject = c.subject;
        p.rewrite_to_switch = true;
        if (c.subject_decl) p.subject_decl = DeclRef{c.subject_decl->file, c.subject_decl->container,
                                                     c.subject_decl->property};
        p.target_file = c.subject_decl ? c.subject_decl->file : c.file;
        choose_name(scope, p.target_file, chain_union_name(c), p.members, p);
        break;
      }
      case ScopeKind::UnionAlias: {
        const auto& f = std::get<index::LiteralFamily>(scope.payload);
        p.members = f.literals;
        for (const auto& a : f.annotation_sites) p.annotation_sites.push_back({a.file, a.decl, a.name});
        p.target_file = f.home_file;
        choose_name(scope, p.target_file, family_union_name(f), p.members, p);
        break;
      }
      case ScopeKind::SatisfiesGuard: {
        const auto& m = std::get<index::MappingLiteral>(scope.payload);
        p.union_ref = m.intended_key_union;
        p.value_type = m.value_type_text;
        break;
      }
    }

    SpecRecord r;
    r.kind = scope.kind;
    r.status = Status::Proposed;
    r.anchor = scope.anchor;
    r.predicate = std::move(p);
    r.id = compute_record_id(r.kind, r.anchor, r.predicate);
    r.explanation = explain(idx, scope, r.predicate);
    if (options.provider) {
      auto alt = options.provider->explanation(scope, r.explanation);
      auto needed = required_mentions(idx, scope, r.predicate);
      if (alt && std::all_of(needed.begin(), needed.end(),
                             [&](const std::string& n) { return alt->find(n) != std::string::npos; }))
        r.explanation = *alt;
    }
    r.created_at = now;
    r.provenance = {snapshot, std::string(kDetectorVersion)};
    result.records.push_back(std::move(r));
  }
  return result;
}

}  // namespace vibeguard::detect
