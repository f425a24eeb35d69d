#include "vibeguard/verify.hpp"

#include <algorithm>
#include <set>

#include "vibeguard/detect.hpp"
#include "vibeguard/error.hpp"

namespace vibeguard::verify {

using index::CodebaseIndex;

std::string_view to_string(Tier tier) noexcept { return tier == Tier::Syntactic ? "syntactic" : "compile"; }

std::string_view to_string(Outcome outcome) noexcept {
  switch (outcome) {
    case Outcome::Pass: return "pass";
    case Outcome::Fail: return "fail";
    case Outcome::NotApplicable: return "not-applicable";
    case Outcome::BudgetExceeded: return "budget-exceeded";
  }
  return "pass";
}

std::string_view to_string(Severity severity) noexcept {
  return severity == Severity::Error ? "error" : "warning";
}

namespace {

std::string switch_locator(const index::SwitchSite& s) {
  return "switch:" + s.discriminant + "#" + std::to_string(s.ordinal);
}

std::string chain_locator(const index::ComparisonChain& c) {
  return "chain:" + c.subject + "#" + std::to_string(c.ordinal);
}

// Declaration name first, then span start.
template <typename T, typename Decl, typename Loc, typename Start>
const T* by_anchor(const std::vector<T>& items, const Anchor& a, Decl decl_of, Loc locator_of, Start start_of) {
  const T* by_span = nullptr;
  for (const auto& item : items) {
    if (item.file != a.path) continue;
    if (decl_of(item) == a.decl && locator_of(item) == a.locator) return &item;
    if (!by_span && start_of(item) == a.start && locator_of(item) == a.locator) by_span = &item;
  }
  return by_span;
}

const index::UnionType* proposed_union(const CodebaseIndex& idx, const SpecPredicate& p) {
  return idx.find_union({p.target_file, p.proposed_name});
}

bool same_set(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  return std::set<std::string>(a.begin(), a.end()) == std::set<std::string>(b.begin(), b.end());
}

// The slot is annotated with a name that resolves to `u`.
bool slot_has_union(const CodebaseIndex& idx, const DeclRef& ref, const index::UnionType& u) {
  auto slot = idx.find_slot(ref.path, ref.decl, ref.name);
  if (!slot || slot->type_text.empty()) return false;
  auto resolved = index::resolve_union(idx, slot->type_text, ref.path);
  return resolved && resolved->key() == u.key();
}

std::string quoted(const std::vector<std::string>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", '" : "'") + values[i] + "'";
  return out;
}

Severity severity_for(const SpecRecord& r) { return r.status == Status::Soft ? Severity::Warning : Severity::Error; }

}  // namespace

const index::SwitchSite* locate_switch(const CodebaseIndex& idx, const Anchor& a) {
  return by_anchor(
      idx.switch_sites(), a, [](const auto& s) { return s.enclosing_decl; }, switch_locator,
      [](const auto& s) { return s.span.start; });
}

const index::ComparisonChain* locate_chain(const CodebaseIndex& idx, const Anchor& a) {
  return by_anchor(
      idx.comparison_chains(), a, [](const auto& c) { return c.enclosing_decl; }, chain_locator,
      [](const auto& c) { return c.root_span.start; });
}

const index::SwitchSite* locate_rewritten_switch(const CodebaseIndex& idx, const SpecRecord& r) {
  const index::SwitchSite* first = nullptr;
  for (const auto& s : idx.switch_sites()) {
    if (s.file != r.anchor.path || s.enclosing_decl != r.anchor.decl || s.discriminant != r.predicate.subject)
      continue;
    if (s.span.start == r.anchor.start) return &s;
    if (!first) first = &s;
  }
  return first;
}

const index::LiteralFamily* locate_family(const CodebaseIndex& idx, const Anchor& a) {
  for (const auto& f : idx.literal_families())
    if (f.anchor == a.locator) return &f;
  return nullptr;
}

const index::MappingLiteral* locate_mapping(const CodebaseIndex& idx, const Anchor& a) {
  const index::MappingLiteral* by_span = nullptr;
  for (const auto& m : idx.mapping_literals()) {
    if (m.file != a.path) continue;
    if (m.decl_name == a.decl) return &m;
    if (!by_span && m.span.start == a.start) by_span = &m;
  }
  return by_span;
}

std::optional<ResolvedScope> resolve_anchor(const CodebaseIndex& idx, const SpecRecord& r) {
  if (!idx.contains(r.anchor.path) && r.kind != ScopeKind::UnionAlias) return std::nullopt;
  switch (r.kind) {
    case ScopeKind::ExhaustiveSwitch:
      if (const auto* s = locate_switch(idx, r.anchor)) return ResolvedScope{s->file, s->span};
      return std::nullopt;
    case ScopeKind::DiscriminatedUnion:
      if (const auto* c = locate_chain(idx, r.anchor)) return ResolvedScope{c->file, c->root_span};
      if (const auto* s = locate_rewritten_switch(idx, r)) return ResolvedScope{s->file, s->span};
      return std::nullopt;
    case ScopeKind::UnionAlias:
      if (const auto* f = locate_family(idx, r.anchor))
        return ResolvedScope{f->sites.front().file, f->sites.front().span};
      if (const auto* u = proposed_union(idx, r.predicate)) return ResolvedScope{u->defining_file, u->decl_span};
      return std::nullopt;
    case ScopeKind::SatisfiesGuard:
      if (const auto* m = locate_mapping(idx, r.anchor)) return ResolvedScope{m->file, m->span};
      return std::nullopt;
  }
  return std::nullopt;
}

bool anchor_resolves(const CodebaseIndex& idx, const SpecRecord& r) { return resolve_anchor(idx, r).has_value(); }

Verdict check_spec(const CodebaseIndex& idx, const SpecRecord& r) {
  Verdict v;
  v.record_id = r.id;
  v.tier = Tier::Syntactic;
  const Severity sev = severity_for(r);
  auto fail = [&](const std::string& path, const Span& span, const std::string& message) {
    v.outcome = Outcome::Fail;
    v.diagnostics.push_back({path, span, message, sev});
  };
  auto not_applicable = [&] {
    v.outcome = Outcome::NotApplicable;
    v.syntactic_outcome = Outcome::NotApplicable;
    return v;
  };

  switch (r.kind) {
    case ScopeKind::ExhaustiveSwitch: {
      const auto* site = idx.contains(r.anchor.path) ? locate_switch(idx, r.anchor) : nullptr;
      if (!site) return not_applicable();
      auto key = site->resolved_union ? site->resolved_union : r.predicate.union_ref;
      const auto* u = key ? idx.find_union(*key) : nullptr;
      if (!u) {
        fail(site->file, site->span, "the union switched over by `" + site->discriminant + "` no longer resolves");
        break;
      }
      const bool equal = same_set(site->cases, u->members);
      if (detect::switch_is_exhaustive(site->cases, u->members, site->default_kind) && !site->has_non_literal_case) {
        v.needs_compile = !equal;
        break;
      }
      v.missing_members = detect::missing_members(u->members, site->cases);
      std::string msg = "switch over `" + site->discriminant + "` in " + site->enclosing_decl +
                        " does not handle every member of " + u->name;
      if (!v.missing_members.empty()) msg += ": missing " + quoted(v.missing_members);
      fail(site->file, site->span, msg);
      break;
    }
    case ScopeKind::DiscriminatedUnion: {
      if (const auto* c = idx.contains(r.anchor.path) ? locate_chain(idx, r.anchor) : nullptr) {
        fail(c->file, c->root_span,
             "`" + c->subject + "` is still compared against string literals; expected a switch over " +
                 r.predicate.proposed_name);
        break;
      }
      const auto* sw = idx.contains(r.anchor.path) ? locate_rewritten_switch(idx, r) : nullptr;
      if (!sw) return not_applicable();
      const auto* u = proposed_union(idx, r.predicate);
      if (!u || !same_set(u->members, r.predicate.members)) {
        fail(sw->file, sw->span, "union " + r.predicate.proposed_name + " with members " +
                                     quoted(r.predicate.members) + " is not declared in " + r.predicate.target_file);
        break;
      }
      if (r.predicate.subject_decl && !slot_has_union(idx, *r.predicate.subject_decl, *u)) {
        fail(sw->file, sw->span,
             r.predicate.subject_decl->decl + "." + r.predicate.subject_decl->name + " is not annotated with " + u->name);
        break;
      }
      if (!sw->resolved_union || *sw->resolved_union != u->key())
        fail(sw->file, sw->span, "switch over `" + sw->discriminant + "` is not typed by " + u->name);
      break;
    }
    case ScopeKind::UnionAlias: {
      if (!resolve_anchor(idx, r)) return not_applicable();
      const auto* u = proposed_union(idx, r.predicate);
      const auto* fam = locate_family(idx, r.anchor);
      const std::string path = fam ? fam->sites.front().file : r.predicate.target_file;
      const Span span = fam ? fam->sites.front().span : (u ? u->decl_span : Span{});
      if (!u || !same_set(u->members, r.predicate.members)) {
        fail(path, span, "union " + r.predicate.proposed_name + " with members " + quoted(r.predicate.members) +
                             " is not declared in " + r.predicate.target_file);
        break;
      }
      for (const auto& site : r.predicate.annotation_sites)
        if (!slot_has_union(idx, site, *u)) fail(path, span, site.decl + "." + site.name + " is not annotated with " + u->name);
      // A family that still resolves carries literals outside the union.
      if (fam && v.outcome != Outcome::Fail)
        fail(path, span, "literals " + quoted(fam->literals) + " are outside " + u->name);
      break;
    }
    case ScopeKind::SatisfiesGuard: {
      const auto* m = idx.contains(r.anchor.path) ? locate_mapping(idx, r.anchor) : nullptr;
      if (!m) return not_applicable();
      const auto key = r.predicate.union_ref ? r.predicate.union_ref : m->intended_key_union;
      const bool guarded = m->has_satisfies_guard && m->intended_key_union && key &&
                           m->intended_key_union->name == key->name;
      if (guarded) {
        v.needs_compile = true;
        break;
      }
      const auto* u = key ? idx.find_union(*key) : nullptr;
      if (u) v.missing_members = detect::missing_members(u->members, m->keys);
      std::string msg = "object `" + m->decl_name + "` has no `satisfies Record<" + (key ? key->name : "?") + ", " +
                        (r.predicate.value_type.empty() ? "unknown" : r.predicate.value_type) + ">` guard";
      if (!v.missing_members.empty()) msg += "; missing keys " + quoted(v.missing_members);
      fail(m->file, m->span, msg);
      break;
    }
  }
  v.syntactic_outcome = v.outcome;
  return v;
}

CompileResult compile_check(const std::filesystem::path& workspace, const CompilerOracle& oracle) {
  return oracle.run(workspace);
}

DiagnosticMapping map_diagnostics(const CodebaseIndex& idx, const std::vector<SpecRecord>& records,
                                  const std::vector<OracleDiagnostic>& diagnostics) {
  DiagnosticMapping out;
  out.per_record.resize(records.size());
  std::vector<std::optional<ResolvedScope>> scopes;
  scopes.reserve(records.size());
  for (const auto& r : records) scopes.push_back(resolve_anchor(idx, r));
  for (const auto& d : diagnostics) {
    const std::string path = index::normalize_path(d.file);
    const auto* ast = idx.ast(path);
    if (!ast) {
      out.unmapped.push_back(d);
      continue;
    }
    const std::uint32_t off = ast->offset_of(d.line, d.col);
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& s = scopes[i];
      if (!s || s->path != path || off < s->span.start || off > s->span.end) continue;
      if (!best) {
        best = i;
        continue;
      }
      const auto& b = *scopes[*best];
      const auto w = s->span.end - s->span.start, bw = b.span.end - b.span.start;
      if (w < bw || (w == bw && records[i].id < records[*best].id)) best = i;
    }
    if (best)
      out.per_record[*best].push_back(d);
    else
      out.unmapped.push_back(d);
  }
  return out;
}

VerificationReport verify_all(const CodebaseIndex& idx, const store::SpecStore& st, const VerifyOptions& options) {
  auto now = options.clock ? options.clock : [] { return std::chrono::steady_clock::now(); };
  const auto started = now();
  VerificationReport report;

  std::vector<const SpecRecord*> active;
  for (const auto& r : st.records())
    if (r.status == Status::Accepted || r.status == Status::Soft) active.push_back(&r);
  std::stable_sort(active.begin(), active.end(), [](const SpecRecord* a, const SpecRecord* b) {
    const bool ha = a->status == Status::Accepted, hb = b->status == Status::Accepted;
    if (ha != hb) return ha;
    if (a->anchor.path != b->anchor.path) return a->anchor.path < b->anchor.path;
    if (a->anchor.start != b->anchor.start) return a->anchor.start < b->anchor.start;
    return a->id < b->id;
  });

  for (const auto* r : active) report.verdicts.push_back(check_spec(idx, *r));

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < report.verdicts.size(); ++i)
    if (report.verdicts[i].needs_compile) pending.push_back(i);

  auto mark_budget = [&] {
    for (auto i : pending) {
      report.verdicts[i].tier = Tier::Compile;
      report.verdicts[i].outcome = Outcome::BudgetExceeded;
    }
  };

  if (!pending.empty()) {
    if (!options.oracle) {
      report.warnings.push_back("compile tier skipped: no oracle configured");
    } else if (now() - started >= options.budget) {
      mark_budget();
      report.warnings.push_back("compile tier skipped: verification budget exhausted");
    } else {
      try {
        ++report.oracle_invocations;
        const CompileResult result = compile_check(options.workspace, *options.oracle);
        std::vector<SpecRecord> candidates;
        for (auto i : pending) candidates.push_back(*active[i]);
        const auto mapping = map_diagnostics(idx, candidates, result.diagnostics);
        for (std::size_t k = 0; k < pending.size(); ++k) {
          Verdict& v = report.verdicts[pending[k]];
          const SpecRecord& r = *active[pending[k]];
          v.tier = Tier::Compile;
          for (const auto& d : mapping.per_record[k]) {
            const auto* ast = idx.ast(index::normalize_path(d.file));
            const auto off = ast ? ast->offset_of(d.line, d.col) : 0;
            v.diagnostics.push_back({index::normalize_path(d.file), ast ? ast->make_span(off, off) : Span{},
                                     d.code + ": " + d.message, severity_for(r)});
          }
          if (!mapping.per_record[k].empty()) {
            v.outcome = Outcome::Fail;
            if (r.kind == ScopeKind::ExhaustiveSwitch) {
              if (const auto* site = locate_switch(idx, r.anchor)) {
                auto key = site->resolved_union ? site->resolved_union : r.predicate.union_ref;
                if (const auto* u = key ? idx.find_union(*key) : nullptr)
                  v.missing_members = detect::missing_members(u->members, site->cases);
              }
            } else if (r.kind == ScopeKind::SatisfiesGuard) {
              if (const auto* m = locate_mapping(idx, r.anchor))
                if (const auto* u = m->intended_key_union ? idx.find_union(*m->intended_key_union) : nullptr)
                  v.missing_members = detect::missing_members(u->members, m->keys);
            }
          }
        }
        report.unmapped = mapping.unmapped;
        if (result.exit_status != 0 && result.diagnostics.empty())
          report.warnings.push_back("oracle exited with status " + std::to_string(result.exit_status) +
                                    " without diagnostics");
      } catch (const Error& e) {
        if (e.code() == ErrorCode::OracleTimeout) {
          mark_budget();
        }
        report.warnings.push_back(std::string("compile tier skipped: ") + e.message());
      }
    }
  }

  for (std::size_t i = 0; i < report.verdicts.size(); ++i) {
    const auto& v = report.verdicts[i];
    switch (v.outcome) {
      case Outcome::Pass: ++report.passed; break;
      case Outcome::Fail:
        ++report.failed;
        if (active[i]->status == Status::Accepted) ++report.hard_failures;
        break;
      case Outcome::NotApplicable: ++report.not_applicable; break;
      case Outcome::BudgetExceeded: ++report.budget_exceeded; break;
    }
  }
  return report;
}

}  // namespace vibeguard::verify
