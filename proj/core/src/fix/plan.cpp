#include <algorithm>
#include <cstring>
#include <set>

#include <nlohmann/json.hpp>

#include "vibeguard/detect.hpp"
#include "vibeguard/fix.hpp"
#include "vibeguard/util.hpp"

namespace vibeguard::fix {

using index::CodebaseIndex;
using syntax::Node;
using syntax::NodeId;
using syntax::NodeKind;
using syntax::SourceAst;

namespace {

std::string dir_of(const std::string& path) {
  auto slash = path.rfind('/');
  return slash == std::string::npos ? "" : path.substr(0, slash + 1);
}

std::string stem_of(const std::string& path) {
  auto base = path.substr(path.rfind('/') == std::string::npos ? 0 : path.rfind('/') + 1);
  auto dot = base.find('.');
  return dot == std::string::npos ? base : base.substr(0, dot);
}

std::string indent_at(std::string_view text, std::uint32_t offset) {
  std::uint32_t ls = offset;
  while (ls > 0 && text[ls - 1] != '\n') --ls;
  std::uint32_t e = ls;
  while (e < text.size() && (text[e] == ' ' || text[e] == '\t')) ++e;
  return std::string(text.substr(ls, e - ls));
}

std::string escape_for(char quote, std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == quote || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string quote(std::string_view s, char q = '\'') { return q + escape_for(q, s) + q; }

std::string quoted_list(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "'" : ", '") + x + "'";
  return out;
}

std::string union_decl(const std::string& name, const std::vector<std::string>& members) {
  std::string out = "export type " + name + " =";
  for (std::size_t i = 0; i < members.size(); ++i) out += (i ? " | " : " ") + quote(members[i]);
  return out + ";";
}

NodeId unwrap(const SourceAst& ast, NodeId id) {
  while (id != syntax::kNoNode && ast.node(id).kind == NodeKind::Parenthesized && !ast.node(id).children.empty())
    id = ast.node(id).children[0];
  return id;
}

bool terminates(const SourceAst& ast, NodeId stmt) {
  const Node& n = ast.node(stmt);
  if (n.kind == NodeKind::Return || n.kind == NodeKind::Throw) return true;
  if (n.kind == NodeKind::Block && !n.children.empty()) return terminates(ast, n.children.back());
  return false;
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  if (from.empty()) return;
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

class Builder {
 public:
  Builder(const CodebaseIndex& idx, const SpecRecord& r) : idx_(idx) {
    plan_.record_id = r.id;
    plan_.snapshot = detect::snapshot_id(idx);
  }

  const CodebaseIndex& idx() const { return idx_; }
  FixPlan& plan() { return plan_; }

  void edit(const std::string& path, std::uint32_t start, std::uint32_t end, std::string text) {
    if (!plan_.file_hashes.count(path)) plan_.file_hashes[path] = sha256_hex(idx_.text(path));
    for (auto& e : plan_.edits) {
      if (e.path != path) continue;
      if (start == end && e.start == e.end && e.start == start) {
        e.replacement += text;
        return;
      }
      const bool overlap = (start < e.end && e.start < end) || (start == end && e.start < start && start < e.end) ||
                           (e.start == e.end && start < e.start && e.start < end);
      if (overlap) throw Error(ErrorCode::AmbiguousFix, "conflicting edits in " + path);
    }
    plan_.edits.push_back({path, start, end, std::move(text)});
  }

  /// Offset and separator for a new top-level line after the imports.
  std::pair<std::uint32_t, bool> import_point(const std::string& file) const {
    const SourceAst* ast = idx_.ast(file);
    std::uint32_t at = 0;
    bool after = false;
    if (ast)
      for (auto item : ast->items())
        if (ast->node(item).kind == NodeKind::Import) {
          at = ast->node(item).span.end;
          after = true;
        }
    return {at, after};
  }

  void add_import_line(const std::string& file, const std::string& line) {
    auto [at, after] = import_point(file);
    edit(file, at, at, after ? "\n" + line : line + "\n");
  }

  void ensure_assert_never(const std::string& file) {
    if (declared(file, "assertNever")) return;
    std::string provider;
    for (const auto& p : idx_.paths())
      if (stem_of(p) == "assertNever" && declared(p, "assertNever") &&
          (provider.empty() || dir_of(p) == dir_of(file)))
        provider = p;
    for (const auto& [p, _] : plan_.creates_files)
      if (stem_of(p) == "assertNever") provider = p;
    if (provider.empty()) {
      provider = dir_of(file) + "assertNever.ts";
      if (idx_.contains(provider))
        throw Error(ErrorCode::AmbiguousFix, provider + " exists but does not declare assertNever");
      plan_.creates_files[provider] = std::string(kAssertNeverSource);
    }
    add_import_line(file, "import { assertNever } from '" + relative_module(file, provider) + "';");
  }

  void ensure_type_import(const std::string& file, const std::string& name, const std::string& from) {
    if (file == from || declared(file, name)) return;
    add_import_line(file, "import type { " + name + " } from '" + relative_module(file, from) + "';");
  }

  /// Declares the union in `target` unless an identical one exists.
  void declare_union(const std::string& target, const std::string& name, const std::vector<std::string>& members) {
    if (const auto* u = idx_.find_union({target, name})) {
      if (std::set<std::string>(u->members.begin(), u->members.end()) ==
          std::set<std::string>(members.begin(), members.end()))
        return;
      throw Error(ErrorCode::AmbiguousFix, "union " + name + " already exists in " + target + " with other members");
    }
    if (declared(target, name))
      throw Error(ErrorCode::AmbiguousFix, "name " + name + " is already declared in " + target);
    const SourceAst* ast = idx_.ast(target);
    if (!ast) throw Error(ErrorCode::UnfixableScope, target + " is not part of the workspace");
    std::uint32_t at = 0;
    bool found = false;
    for (auto item : ast->items()) {
      const auto k = ast->node(item).kind;
      if (k == NodeKind::TypeAlias || k == NodeKind::Interface) {
        at = ast->node(item).span.end;
        found = true;
      }
    }
    if (!found) {
      auto [imp, after] = import_point(target);
      at = imp;
      found = after;
    }
    const std::string text = union_decl(name, members);
    edit(target, at, at, found ? "\n\n" + text : text + "\n\n");
  }

  void annotate(const DeclRef& ref, const std::string& type_name) {
    auto slot = idx_.find_slot(ref.path, ref.decl, ref.name);
    if (!slot) throw Error(ErrorCode::UnfixableScope, "declaration " + ref.decl + "." + ref.name + " not found");
    if (!slot->type_text.empty()) {
      if (slot->type_text == type_name) return;
      edit(ref.path, slot->type_span.start, slot->type_span.end, type_name);
      return;
    }
    std::uint32_t at = slot->name_span.end;
    const auto text = idx_.text(ref.path);
    if (at < text.size() && text[at] == '?') ++at;
    edit(ref.path, at, at, ": " + type_name);
  }

  FixPlan finish() {
    std::sort(plan_.edits.begin(), plan_.edits.end(), [](const TextEdit& a, const TextEdit& b) {
      if (a.path != b.path) return a.path < b.path;
      return a.start > b.start;
    });
    return std::move(plan_);
  }

 private:
  bool declared(const std::string& file, const std::string& name) const {
    auto names = idx_.top_level_names(file);
    return std::find(names.begin(), names.end(), name) != names.end();
  }

  const CodebaseIndex& idx_;
  FixPlan plan_;
};

// ---- exhaustive switch ------------------------------------------------------

struct CaseShape {
  NodeId clause = syntax::kNoNode;
  NodeId ret = syntax::kNoNode;   // the Return statement
  NodeId expr = syntax::kNoNode;  // its (unwrapped) expression
  std::string member;
  std::string key;  // shared-pattern key, empty when none
};

std::string shape_key(const SourceAst& ast, NodeId expr) {
  const Node& n = ast.node(expr);
  if (n.kind == NodeKind::Call && !n.children.empty())
    return "call:" + std::string(ast.node_text(n.children[0]));
  if (n.kind == NodeKind::Jsx) {
    std::string key = "jsx:" + n.name;
    for (auto c : n.children)
      if (ast.node(c).kind == NodeKind::JsxAttribute) key += ":" + ast.node(c).name;
    return key;
  }
  return {};
}

// The sibling's expression with its member substituted in string positions.
std::string synthesize(const SourceAst& ast, const CaseShape& sibling, const std::string& member,
                       std::vector<std::string>& placeholders) {
  const Node& expr = ast.node(sibling.expr);
  const std::uint32_t base = expr.span.start;
  std::string text(ast.node_text(sibling.expr));
  struct Rep {
    std::uint32_t start, end;
    std::string text;
  };
  std::vector<Rep> reps;
  syntax::walk(ast, sibling.expr, [&](NodeId id, const Node& n) {
    const NodeId parent = n.parent;
    const bool in_attr = parent != syntax::kNoNode && ast.node(parent).kind == NodeKind::JsxAttribute;
    if (n.kind == NodeKind::StringLiteral && n.span.size() >= 2) {
      if (in_attr) {
        reps.push_back({n.span.start + 1, n.span.end - 1, "TODO"});
        placeholders.push_back(ast.node(parent).name);
      } else if (n.value == sibling.member) {
        const char q = ast.text()[n.span.start];
        reps.push_back({n.span.start + 1, n.span.end - 1, escape_for(q, member)});
      }
    } else if (n.kind == NodeKind::JsxText) {
      std::string t = n.value;
      const std::string cap_old = detect::capitalize(sibling.member), cap_new = detect::capitalize(member);
      if (t.find(cap_old) != std::string::npos)
        replace_all(t, cap_old, cap_new);
      else
        replace_all(t, sibling.member, member);
      if (t != n.value) reps.push_back({n.span.start, n.span.end, t});
    }
    (void)id;
    return true;
  });
  std::sort(reps.begin(), reps.end(), [](const Rep& a, const Rep& b) { return a.start > b.start; });
  for (const auto& r : reps) text.replace(r.start - base, r.end - r.start, r.text);
  return text;
}

void plan_exhaustive(Builder& b, const SpecRecord& r, const verify::Verdict& verdict) {
  const auto& idx = b.idx();
  const auto* site = verify::locate_switch(idx, r.anchor);
  if (!site) throw Error(ErrorCode::UnfixableScope, "switch for record " + r.id + " no longer resolves");
  const auto key = site->resolved_union ? site->resolved_union : r.predicate.union_ref;
  const auto* u = key ? idx.find_union(*key) : nullptr;
  if (!u) throw Error(ErrorCode::UnfixableScope, "union for record " + r.id + " no longer resolves");
  const SourceAst& ast = *idx.ast(site->file);
  const auto text = ast.text();
  const Node& sw = ast.node(site->node);
  const std::vector<std::string> missing = detect::missing_members(u->members, site->cases);
  const std::string disc =
      site->discriminant.empty() ? std::string(ast.node_text(sw.children.at(0))) : site->discriminant;
  const bool in_function = site->enclosing_decl != "<module>";

  std::vector<CaseShape> cases;
  NodeId last_case = syntax::kNoNode, default_clause = syntax::kNoNode;
  bool renderer_like = true;
  for (std::size_t i = 1; i < sw.children.size(); ++i) {
    const NodeId c = sw.children[i];
    const Node& clause = ast.node(c);
    if (clause.kind == NodeKind::DefaultClause) {
      default_clause = c;
      continue;
    }
    last_case = c;
    CaseShape shape;
    shape.clause = c;
    const Node& test = ast.node(unwrap(ast, clause.children.at(0)));
    shape.member = test.value;
    if (clause.children.size() == 2 && ast.node(clause.children[1]).kind == NodeKind::Return &&
        !ast.node(clause.children[1]).children.empty()) {
      shape.ret = clause.children[1];
      shape.expr = unwrap(ast, ast.node(shape.ret).children[0]);
      shape.key = shape_key(ast, shape.expr);
    } else {
      renderer_like = false;
    }
    cases.push_back(std::move(shape));
  }
  const bool shared = renderer_like && !cases.empty() &&
                      std::all_of(cases.begin(), cases.end(), [&](const CaseShape& s) {
                        return !s.key.empty() && s.key == cases.front().key;
                      });
  // A stub like `render('x')` must not pass a literal the callee's typed
  // parameter rejects.
  std::string ill_typed;
  if (shared && !missing.empty()) {
    const Node& call = ast.node(cases.back().expr);
    const Node& callee = call.kind == NodeKind::Call ? ast.node(call.children.at(0)) : call;
    if (call.kind == NodeKind::Call && callee.kind == NodeKind::Identifier) {
      for (std::size_t a = 1; a < call.children.size(); ++a) {
        const Node& arg = ast.node(call.children[a]);
        if (arg.kind != NodeKind::StringLiteral || arg.value != cases.back().member) continue;
        for (const auto& fam : idx.literal_families())
          if (fam.callee == callee.name && fam.arg_index == a - 1)
            ill_typed = "stubs would add literals to the open string family of " + callee.name + "()";
        const auto domain = index::parameter_literals(idx, site->file, callee.name, a - 1);
        if (!domain) continue;
        for (const auto& m : missing)
          if (std::find(domain->begin(), domain->end(), m) == domain->end())
            ill_typed = "'" + m + "' is not accepted by " + callee.name + "()";
      }
    }
  }
  const bool stubs = shared && !missing.empty() && ill_typed.empty();
  const bool guarded = r.predicate.behavior == Behavior::AssertNeverDefault ||
                       site->default_kind == index::DefaultKind::AssertNever;
  if (!guarded)
    for (const auto& c : site->cases)
      if (std::find(u->members.begin(), u->members.end(), c) == u->members.end())
        throw Error(ErrorCode::AmbiguousFix, "case '" + c + "' is not a member of " + u->name +
                                                 "; adding cases cannot make the labels equal the members");

  const std::uint32_t anchor_clause_end =
      last_case != syntax::kNoNode ? ast.node(last_case).span.end : 0;
  const std::string indent = last_case != syntax::kNoNode ? indent_at(text, ast.node(last_case).span.start)
                             : default_clause != syntax::kNoNode
                                 ? indent_at(text, ast.node(default_clause).span.start)
                                 : indent_at(text, sw.span.start) + "  ";
  auto& plan = b.plan();
  std::vector<std::string> added;

  if (stubs) {
    const CaseShape& sibling = cases.back();
    const char q = text[ast.node(ast.node(sibling.clause).children[0]).span.start];
    const bool semi = ast.node_text(sibling.ret).ends_with(";");
    std::string block;
    for (const auto& m : missing) {
      std::vector<std::string> placeholders;
      const std::string body = synthesize(ast, sibling, m, placeholders);
      block += "\n" + indent + "case " + quote(m, q == '"' ? '"' : '\'') + ": return " + body + (semi ? ";" : "");
      for (const auto& attr : placeholders)
        plan.review_notes.push_back("case '" + m + "': placeholder value \"TODO\" for attribute `" + attr +
                                    "` copied from case '" + sibling.member + "' needs review");
      added.push_back(m);
    }
    b.edit(site->file, anchor_clause_end, anchor_clause_end, block);
  }

  std::string default_action;
  const std::string guard = std::string("default: ") + (in_function ? "return " : "") + "assertNever(" + disc + ");";
  switch (site->default_kind) {
    case index::DefaultKind::None: {
      if (r.predicate.behavior != Behavior::AssertNeverDefault && !stubs)
        throw Error(ErrorCode::AmbiguousFix,
                    "cannot synthesize cases for " + disc + (ill_typed.empty() ? "" : ": " + ill_typed));
      if (r.predicate.behavior == Behavior::AssertNeverDefault) {
        const std::uint32_t at =
            sw.children.size() > 1 ? ast.node(sw.children.back()).span.end : sw.span.end - 1;
        std::string insert = "\n" + indent + std::string(kGuardComment) + "\n" + indent + guard;
        if (sw.children.size() == 1) insert += "\n" + indent_at(text, sw.span.start);
        b.edit(site->file, at, at, insert);
        b.ensure_assert_never(site->file);
        default_action = "an assertNever default";
      }
      break;
    }
    case index::DefaultKind::Plain:
      if (r.predicate.behavior == Behavior::AssertNeverDefault) {
        const Node& d = ast.node(default_clause);
        b.edit(site->file, d.span.start, d.span.end,
               std::string(kGuardComment) + "\n" + indent_at(text, d.span.start) + guard);
        b.ensure_assert_never(site->file);
        default_action = "an assertNever default in place of the plain one";
      } else if (!stubs) {
        throw Error(ErrorCode::AmbiguousFix,
                    !ill_typed.empty() ? "cannot stub the missing cases over `" + disc + "`: " + ill_typed
                                       : "the cases over `" + disc + "` do not share a return shape and the "
                                         "plain default cannot be replaced");
      }
      break;
    case index::DefaultKind::AssertNever:
      if (!stubs)
        throw Error(ErrorCode::AmbiguousFix, "cannot stub " + quoted_list(missing) + ": the cases over `" + disc +
                                             "` do not share a return shape");
      break;
  }

  for (const auto& m : missing)
    if (std::find(added.begin(), added.end(), m) == added.end())
      plan.review_notes.push_back("AmbiguousFix: no handler synthesized for '" + m + "' because " +
                                  (ill_typed.empty() ? "the existing cases do not share a callee or JSX shape"
                                                     : ill_typed) +
                                  "; the assertNever default rejects it at compile time until it is handled");

  std::string summary;
  if (!added.empty()) {
    summary = "Add case";
    summary += added.size() > 1 ? "s " : " ";
    for (std::size_t i = 0; i < added.size(); ++i) summary += (i ? ", '" : "'") + added[i] + "'";
    summary += default_action.empty() ? "" : " and " + default_action;
  } else {
    summary = "Add " + default_action;
  }
  summary += " to the switch over `" + disc + "` in " + site->enclosing_decl + " (" + site->file + ").";
  if (verdict.tier == verify::Tier::Compile) summary += " Resolves the compiler error at the assertNever call.";
  plan.summary = summary;
}

// ---- discriminated union ----------------------------------------------------

void plan_discriminated(Builder& b, const SpecRecord& r) {
  const auto& idx = b.idx();
  const auto* chain = verify::locate_chain(idx, r.anchor);
  if (!chain) throw Error(ErrorCode::UnfixableScope, "comparison chain for record " + r.id + " no longer resolves");
  const auto& p = r.predicate;
  if (!p.subject_decl)
    throw Error(ErrorCode::AmbiguousFix, "`" + chain->subject + "` has no visible declaration to annotate");
  if (chain->has_negated || chain->mixed_predicates || chain->has_terminal_else ||
      chain->arms.size() != chain->observed_values.size())
    throw Error(ErrorCode::AmbiguousFix, "the chain on `" + chain->subject +
                                         "` mixes negations, other tests, repeated values or a final else and "
                                         "cannot be rewritten to a switch mechanically");

  b.declare_union(p.target_file, p.proposed_name, p.members);
  b.annotate(*p.subject_decl, p.proposed_name);

  const SourceAst& ast = *idx.ast(chain->file);
  const auto text = ast.text();
  const std::string indent = indent_at(text, chain->root_span.start);
  const std::string inner = indent + (indent.find('\t') != std::string::npos ? "\t" : "  ");
  const bool in_function = chain->enclosing_decl != "<module>";
  std::string out = "switch (" + chain->subject + ") {\n";
  for (const auto& arm : chain->arms) {
    const Node& if_node = ast.node(arm.if_node);
    const NodeId cons = if_node.children.at(1);
    out += inner + "case " + quote(arm.value) + ": " + std::string(ast.node_text(cons));
    if (!terminates(ast, cons)) out += " break;";
    out += "\n";
  }
  out += inner + "default: " + (in_function ? "return " : "") + "assertNever(" + chain->subject + ");\n";
  out += indent + "}";
  b.edit(chain->file, chain->root_span.start, chain->root_span.end, out);
  b.ensure_assert_never(chain->file);

  b.plan().summary = "Declare `" + union_decl(p.proposed_name, p.members) + "` in " + p.target_file + ", annotate " +
                     p.subject_decl->decl + "." + p.subject_decl->name + " with " + p.proposed_name +
                     " and rewrite the comparisons on `" + chain->subject + "` in " + chain->enclosing_decl +
                     " as a switch with an assertNever default.";
}

// ---- union alias --------------------------------------------------------------

void plan_alias(Builder& b, const SpecRecord& r) {
  const auto& idx = b.idx();
  const auto& p = r.predicate;
  if (!verify::locate_family(idx, r.anchor) && !idx.find_union({p.target_file, p.proposed_name}))
    throw Error(ErrorCode::UnfixableScope, "literal family for record " + r.id + " no longer resolves");
  if (p.annotation_sites.empty())
    throw Error(ErrorCode::AmbiguousFix, "no parameter or property declaration consumes the strings");
  b.declare_union(p.target_file, p.proposed_name, p.members);
  std::string sites;
  for (const auto& site : p.annotation_sites) {
    b.annotate(site, p.proposed_name);
    b.ensure_type_import(site.path, p.proposed_name, p.target_file);
    sites += (sites.empty() ? "" : ", ") + site.decl + "." + site.name;
  }
  b.plan().summary = "Declare `" + union_decl(p.proposed_name, p.members) + "` in " + p.target_file +
                     " and annotate " + sites + " with it.";
}

// ---- satisfies guard ----------------------------------------------------------

void plan_guard(Builder& b, const SpecRecord& r) {
  const auto& idx = b.idx();
  const auto* m = verify::locate_mapping(idx, r.anchor);
  if (!m) throw Error(ErrorCode::UnfixableScope, "object for record " + r.id + " no longer resolves");
  const auto key = r.predicate.union_ref ? r.predicate.union_ref : m->intended_key_union;
  if (!key) throw Error(ErrorCode::UnfixableScope, "key union for record " + r.id + " no longer resolves");
  const std::string v = r.predicate.value_type.empty() ? "unknown" : r.predicate.value_type;
  if (r.predicate.value_type.empty())
    b.plan().review_notes.push_back("value type is not declared anywhere; `unknown` needs review");
  b.ensure_type_import(m->file, key->name, key->file);
  const std::string guard = " satisfies Record<" + key->name + ", " + v + ">";
  b.edit(m->file, m->insert_at, m->insert_at, guard);
  b.plan().summary = "Append `" + guard.substr(1) + "` to `" + m->decl_name + "` in " + m->file + ".";
}

}  // namespace

std::string relative_module(const std::string& from_file, const std::string& to_file) {
  auto split = [](const std::string& p) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
      auto slash = p.find('/', pos);
      parts.push_back(p.substr(pos, slash == std::string::npos ? std::string::npos : slash - pos));
      if (slash == std::string::npos) break;
      pos = slash + 1;
    }
    return parts;
  };
  auto from = split(from_file);
  from.pop_back();
  auto to = split(to_file);
  std::string leaf = to.back();
  to.pop_back();
  for (const char* ext : {".d.ts", ".tsx", ".ts"}) {
    if (leaf.size() > std::strlen(ext) && leaf.ends_with(ext)) {
      leaf.resize(leaf.size() - std::strlen(ext));
      break;
    }
  }
  std::size_t common = 0;
  while (common < from.size() && common < to.size() && from[common] == to[common]) ++common;
  std::string out;
  for (std::size_t i = common; i < from.size(); ++i) out += "../";
  if (out.empty()) out = "./";
  for (std::size_t i = common; i < to.size(); ++i) out += to[i] + "/";
  return out + leaf;
}

FixPlan plan_fix(const CodebaseIndex& idx, const SpecRecord& r, const verify::Verdict& verdict) {
  if (verdict.outcome != verify::Outcome::Fail)
    throw Error(ErrorCode::InvalidArgument, "record " + r.id + " is not failing; nothing to fix");
  Builder b(idx, r);
  switch (r.kind) {
    case ScopeKind::ExhaustiveSwitch: plan_exhaustive(b, r, verdict); break;
    case ScopeKind::DiscriminatedUnion: plan_discriminated(b, r); break;
    case ScopeKind::UnionAlias: plan_alias(b, r); break;
    case ScopeKind::SatisfiesGuard: plan_guard(b, r); break;
  }
  return b.finish();
}

nlohmann::json plan_to_json(const FixPlan& plan) {
  nlohmann::json edits = nlohmann::json::array();
  for (const auto& e : plan.edits)
    edits.push_back({{"path", e.path}, {"start", e.start}, {"end", e.end}, {"replacement", e.replacement}});
  return {{"record_id", plan.record_id},     {"summary", plan.summary},
          {"edits", std::move(edits)},       {"creates_files", plan.creates_files},
          {"review_notes", plan.review_notes}, {"file_hashes", plan.file_hashes},
          {"snapshot", plan.snapshot}};
}

}  // namespace vibeguard::fix
