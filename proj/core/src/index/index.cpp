#include "vibeguard/index.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "index/facts.hpp"
#include "vibeguard/error.hpp"

namespace vibeguard::index {

using detail::AliasDecl;
using detail::BindingType;
using detail::FileFacts;
using detail::FunctionDecl;
using detail::InterfaceDecl;
using detail::LinkedFacts;
using detail::TypeExpr;
using syntax::NodeId;

std::string_view to_string(DefaultKind kind) noexcept {
  switch (kind) {
    case DefaultKind::None: return "none";
    case DefaultKind::Plain: return "plain";
    case DefaultKind::AssertNever: return "assert_never";
  }
  return "none";
}

std::string_view to_string(SubjectType type) noexcept {
  switch (type) {
    case SubjectType::Absent: return "absent";
    case SubjectType::String: return "string";
    case SubjectType::Union: return "union";
    case SubjectType::Other: return "other";
  }
  return "absent";
}

std::string_view to_string(SiteContext context) noexcept {
  switch (context) {
    case SiteContext::CallArgument: return "call-argument";
    case SiteContext::PropertyValue: return "property-value";
    case SiteContext::Comparison: return "comparison";
  }
  return "call-argument";
}

std::string normalize_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i <= path.size()) {
    const auto slash = path.find('/', i);
    const auto end = slash == std::string_view::npos ? path.size() : slash;
    const std::string_view seg = path.substr(i, end - i);
    if (seg == "..") {
      if (!parts.empty() && parts.back() != "..") parts.pop_back();
      else parts.emplace_back("..");
    } else if (!seg.empty() && seg != ".") {
      parts.emplace_back(seg);
    }
    if (slash == std::string_view::npos) break;
    i = slash + 1;
  }
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += '/';
    out += p;
  }
  return out;
}

/// Name and module resolution across the file set. Records every path it
/// consults so incremental updates know what to re-link.
class Linker {
 public:
  explicit Linker(const CodebaseIndex& index) : index_(index) {}

  struct Symbol {
    enum class Kind { None, Union, Alias, Interface, Function } kind = Kind::None;
    const FileFacts* file = nullptr;
    const UnionType* union_type = nullptr;
    const AliasDecl* alias = nullptr;
    const InterfaceDecl* interface = nullptr;
    const FunctionDecl* function = nullptr;
  };

  struct TypeCtx {
    const FileFacts* file = nullptr;
    TypeExpr type;
  };

  std::set<std::string> deps;

  const FileFacts* file(const std::string& path) {
    deps.insert(path);
    const auto it = index_.files_.find(path);
    if (it == index_.files_.end() || it->second->failure) return nullptr;
    return it->second.get();
  }

  std::optional<std::string> resolve_module(const std::string& from, const std::string& spec) {
    if (!spec.starts_with("./") && !spec.starts_with("../")) return std::nullopt;
    const std::string dir = detail::dirname(from);
    const std::string base = normalize_path(dir.empty() ? spec : dir + "/" + spec);
    std::vector<std::string> candidates;
    auto strip = [&](std::string_view ext) {
      return base.size() > ext.size() && base.ends_with(ext) ? base.substr(0, base.size() - ext.size())
                                                             : std::string();
    };
    if (const auto js = strip(".js"); !js.empty()) {
      candidates.push_back(js + ".ts");
      candidates.push_back(js + ".tsx");
    } else if (const auto jsx = strip(".jsx"); !jsx.empty()) {
      candidates.push_back(jsx + ".tsx");
    }
    for (const char* ext : {".ts", ".tsx", ".d.ts"}) candidates.push_back(base + ext);
    if (base.ends_with(".ts") || base.ends_with(".tsx")) candidates.push_back(base);
    candidates.push_back(base + "/index.ts");
    candidates.push_back(base + "/index.tsx");
    for (const auto& c : candidates) {
      deps.insert(c);
      if (index_.files_.count(c)) return c;
    }
    return std::nullopt;
  }

  Symbol local_symbol(const FileFacts& f, const std::string& name) {
    Symbol s;
    s.file = &f;
    for (const auto& u : f.unions)
      if (u.name == name) {
        s.kind = Symbol::Kind::Union;
        s.union_type = &u;
        return s;
      }
    for (const auto& a : f.aliases)
      if (a.name == name) {
        s.kind = Symbol::Kind::Alias;
        s.alias = &a;
        return s;
      }
    for (const auto& i : f.interfaces)
      if (i.name == name) {
        s.kind = Symbol::Kind::Interface;
        s.interface = &i;
        return s;
      }
    for (const auto& fn : f.functions)
      if (fn.name == name) {
        s.kind = Symbol::Kind::Function;
        s.function = &fn;
        return s;
      }
    return {};
  }

  Symbol resolve_symbol(const std::string& path, const std::string& name, int depth = 0) {
    if (depth > 16) return {};
    const FileFacts* f = file(path);
    if (!f) return {};
    Symbol s = local_symbol(*f, name);
    if (s.kind != Symbol::Kind::None) return s;
    for (const auto& imp : f->imports) {
      if (imp.local != name || imp.imported == "*") continue;
      const auto target = resolve_module(path, imp.specifier);
      if (!target) return {};
      return resolve_export(*target, imp.imported, depth + 1);
    }
    return {};
  }

  Symbol resolve_export(const std::string& path, const std::string& name, int depth) {
    if (depth > 16) return {};
    const FileFacts* f = file(path);
    if (!f) return {};
    for (const auto& e : f->exports) {
      if (e.exported != name) continue;
      if (e.from.empty()) return resolve_symbol(path, e.local, depth + 1);
      const auto target = resolve_module(path, e.from);
      return target ? resolve_export(*target, e.local, depth + 1) : Symbol{};
    }
    for (const auto& spec : f->star_exports) {
      const auto target = resolve_module(path, spec);
      if (!target) continue;
      Symbol s = resolve_export(*target, name, depth + 1);
      if (s.kind != Symbol::Kind::None) return s;
    }
    return {};
  }

  struct PropertyHit {
    TypeCtx type;
    PropertyRef ref;
  };

  std::optional<PropertyHit> property(const TypeCtx& ctx, const std::string& prop, int depth = 0) {
    if (!ctx.file || depth > 16) return std::nullopt;
    const TypeExpr& t = ctx.type;
    if (t.kind == TypeExpr::Kind::Object) {
      for (const auto& p : detail::object_type_props(*ctx.file->ast, t.node))
        if (p.name == prop) return PropertyHit{{ctx.file, p.type}, {ctx.file->path, "", p.name, p.name_span, p.type.span}};
      return std::nullopt;
    }
    if (t.kind != TypeExpr::Kind::Ref) return std::nullopt;
    const Symbol s = resolve_symbol(ctx.file->path, t.name);
    if (s.kind == Symbol::Kind::Interface) {
      for (const auto& p : s.interface->props)
        if (p.name == prop)
          return PropertyHit{{s.file, p.type}, {s.file->path, s.interface->name, p.name, p.name_span, p.type.span}};
      return std::nullopt;
    }
    if (s.kind == Symbol::Kind::Alias && s.alias->type.kind == TypeExpr::Kind::Object) {
      auto hit = property({s.file, s.alias->type}, prop, depth + 1);
      if (hit) hit->ref.container = s.alias->name;
      return hit;
    }
    if (s.kind == Symbol::Kind::Alias) return property({s.file, s.alias->type}, prop, depth + 1);
    return std::nullopt;
  }

  /// Classifies a type, following aliases; fills `key` for named unions.
  SubjectType classify(const TypeCtx& ctx, std::optional<UnionKey>& key, int depth = 0) {
    if (!ctx.file || depth > 16) return SubjectType::Absent;
    switch (ctx.type.kind) {
      case TypeExpr::Kind::None: return SubjectType::Absent;
      case TypeExpr::Kind::String: return SubjectType::String;
      case TypeExpr::Kind::Literals: return SubjectType::Union;
      case TypeExpr::Kind::Ref: {
        const Symbol s = resolve_symbol(ctx.file->path, ctx.type.name);
        if (s.kind == Symbol::Kind::Union) {
          key = s.union_type->key();
          return SubjectType::Union;
        }
        if (s.kind == Symbol::Kind::Alias) return classify({s.file, s.alias->type}, key, depth + 1);
        if (s.kind == Symbol::Kind::None) return SubjectType::Absent;
        return SubjectType::Other;
      }
      default:
        return SubjectType::Other;
    }
  }

  struct Resolved {
    SubjectType type = SubjectType::Absent;
    std::optional<UnionKey> key;
    std::optional<PropertyRef> decl;
  };

  Resolved resolve_binding(const FileFacts& f, const BindingType& b) {
    Resolved r;
    if (!b.known) return r;
    TypeCtx cur{&f, b.base};
    for (const auto& step : b.path) {
      auto hit = property(cur, step);
      if (!hit) return r;
      cur = hit->type;
      r.decl = hit->ref;
    }
    r.type = classify(cur, r.key);
    return r;
  }

  /// `Record<K, V>`: the union K names and V's source text.
  std::pair<std::optional<UnionKey>, std::string> record_type(const FileFacts& f, const TypeExpr& t) {
    if (t.kind != TypeExpr::Kind::Ref || t.name != "Record") return {};
    const auto& args = f.ast->node(t.node).children;
    if (args.empty()) return {};
    std::optional<UnionKey> key;
    classify({&f, detail::type_expr(*f.ast, args[0])}, key);
    std::string value;
    if (args.size() > 1) value = std::string(f.ast->node_text(args[1]));
    return {key, value};
  }

  std::shared_ptr<const LinkedFacts> link(const FileFacts& f) {
    deps.clear();
    deps.insert(f.path);
    auto out = std::make_shared<LinkedFacts>();
    if (f.failure) {
      out->deps.assign(deps.begin(), deps.end());
      return out;
    }
    for (const auto& raw : f.switches) {
      SwitchSite s = raw.site;
      const Resolved r = resolve_binding(f, raw.subject);
      if (r.key) s.resolved_union = r.key;
      out->switches.push_back(std::move(s));
    }
    for (const auto& raw : f.chains) {
      ComparisonChain c = raw.chain;
      const Resolved r = resolve_binding(f, raw.subject);
      c.subject_type = r.type;
      c.subject_union = r.key;
      c.subject_decl = r.decl;
      out->chains.push_back(std::move(c));
    }
    for (const auto& imp : f.imports) {
      const auto target = resolve_module(f.path, imp.specifier);
      if (target) out->imports.push_back({imp.imported, *target});
    }
    for (const auto& obj : f.objects) {
      std::optional<UnionKey> annotated, guarded;
      std::string value;
      if (obj.annotation) std::tie(annotated, value) = record_type(f, *obj.annotation);
      if (obj.satisfies_type) {
        auto [g, v] = record_type(f, *obj.satisfies_type);
        guarded = g;
        if (value.empty()) value = v;
      }
      out->object_annotation_union.push_back(annotated);
      out->object_guard_union.push_back(guarded);
      out->object_value_text.push_back(value);
    }
    out->deps.assign(deps.begin(), deps.end());
    return out;
  }

 private:
  const CodebaseIndex& index_;
};

CodebaseIndex::CodebaseIndex() = default;

std::vector<std::string> CodebaseIndex::paths() const {
  std::vector<std::string> out;
  for (const auto& [p, _] : files_) out.push_back(p);
  return out;
}

bool CodebaseIndex::contains(const std::string& path) const { return files_.count(path) != 0; }

const syntax::SourceAst* CodebaseIndex::ast(const std::string& path) const {
  const auto it = files_.find(path);
  return it == files_.end() ? nullptr : it->second->ast.get();
}

std::string_view CodebaseIndex::text(const std::string& path) const {
  const auto it = files_.find(path);
  return it == files_.end() ? std::string_view{} : std::string_view(it->second->text);
}

const std::vector<syntax::Diagnostic>& CodebaseIndex::diagnostics(const std::string& path) const {
  static const std::vector<syntax::Diagnostic> kEmpty;
  const auto it = files_.find(path);
  return it == files_.end() ? kEmpty : it->second->diagnostics;
}

std::optional<std::string> CodebaseIndex::failure(const std::string& path) const {
  const auto it = files_.find(path);
  return it == files_.end() ? std::nullopt : it->second->failure;
}

const UnionType* CodebaseIndex::find_union(const UnionKey& key) const {
  const auto it = files_.find(key.file);
  if (it == files_.end()) return nullptr;
  for (const auto& u : it->second->unions)
    if (u.name == key.name) return &u;
  return nullptr;
}

std::vector<std::string> CodebaseIndex::top_level_names(const std::string& path) const {
  const auto it = files_.find(path);
  return it == files_.end() ? std::vector<std::string>{} : it->second->top_level_names;
}

std::optional<CodebaseIndex::TypeSlot> CodebaseIndex::find_slot(const std::string& path,
                                                                const std::string& decl,
                                                                const std::string& name) const {
  const auto it = files_.find(path);
  if (it == files_.end()) return std::nullopt;
  const FileFacts& f = *it->second;
  auto make = [&](const Span& name_span, const TypeExpr& type) {
    TypeSlot slot{name_span, {}, {}};
    if (type.kind != TypeExpr::Kind::None) {
      slot.type_span = type.span;
      slot.type_text = std::string(f.ast->node_text(type.span));
    }
    return slot;
  };
  for (const auto& fn : f.functions)
    if (fn.name == decl)
      for (const auto& p : fn.params)
        if (p.name == name) return make(p.name_span, p.type);
  for (const auto& iface : f.interfaces)
    if (iface.name == decl)
      for (const auto& p : iface.props)
        if (p.name == name) return make(p.name_span, p.type);
  for (const auto& alias : f.aliases)
    if (alias.name == decl && alias.type.kind == TypeExpr::Kind::Object)
      for (const auto& p : detail::object_type_props(*f.ast, alias.type.node))
        if (p.name == name) return make(p.name_span, p.type);
  return std::nullopt;
}

bool operator==(const CodebaseIndex& a, const CodebaseIndex& b) {
  if (a.files_.size() != b.files_.size()) return false;
  for (auto i = a.files_.begin(), j = b.files_.begin(); i != a.files_.end(); ++i, ++j) {
    if (i->first != j->first || i->second->text != j->second->text ||
        i->second->failure != j->second->failure)
      return false;
  }
  return a.unions_ == b.unions_ && a.switches_ == b.switches_ && a.chains_ == b.chains_ &&
         a.families_ == b.families_ && a.mappings_ == b.mappings_ && a.imports_ == b.imports_;
}

void CodebaseIndex::relink(const std::vector<std::string>& dirty) {
  Linker linker(*this);
  for (const auto& path : dirty) {
    const auto it = files_.find(path);
    if (it == files_.end()) continue;
    linked_[path] = linker.link(*it->second);
    ++stats_.relinked;
  }
}

void CodebaseIndex::aggregate() {
  unions_.clear();
  switches_.clear();
  chains_.clear();
  families_.clear();
  mappings_.clear();
  imports_.clear();
  for (const auto& [path, f] : files_) {
    unions_.insert(unions_.end(), f->unions.begin(), f->unions.end());
    const auto& l = *linked_.at(path);
    switches_.insert(switches_.end(), l.switches.begin(), l.switches.end());
    chains_.insert(chains_.end(), l.chains.begin(), l.chains.end());
    if (!l.imports.empty()) imports_[path] = l.imports;
  }

  Linker linker(*this);

  // Literal families, grouped by anchor.
  std::map<std::string, LiteralFamily> groups;
  for (const auto& [path, f] : files_) {
    for (const auto& raw : f->literals) {
      LiteralFamily& fam = groups[raw.anchor];
      if (fam.anchor.empty()) {
        fam.anchor = raw.anchor;
        fam.callee = raw.callee;
        fam.arg_index = raw.arg_index;
        fam.property = raw.property;
        fam.home_file = path;
      }
      fam.sites.push_back(raw.site);
    }
  }
  for (auto& [anchor, fam] : groups) {
    std::set<std::string> formalized;  // literals already typed by a union here
    if (!fam.callee.empty()) {
      // Consumer side: the callee's declaration, if it is in the workspace.
      const bool simple = fam.callee.find('.') == std::string::npos;
      const auto sym = simple ? linker.resolve_symbol(fam.sites.front().file, fam.callee)
                              : Linker::Symbol{};
      if (sym.kind == Linker::Symbol::Kind::Function && fam.arg_index < sym.function->params.size()) {
        const auto& param = sym.function->params[fam.arg_index];
        fam.param_name = param.name;
        fam.home_file = sym.file->path;
        std::optional<UnionKey> key;
        const auto type = linker.classify({sym.file, param.type}, key);
        if (type == SubjectType::Union && key) {
          if (const UnionType* u = find_union(*key)) formalized.insert(u->members.begin(), u->members.end());
        } else if (type == SubjectType::Union && param.type.kind == TypeExpr::Kind::Literals) {
          formalized.insert(param.type.literals.begin(), param.type.literals.end());
        }
        if (!param.name.empty())
          fam.annotation_sites.push_back({sym.file->path, sym.function->name, param.name, param.name_span,
                                          param.type.kind == TypeExpr::Kind::None ? Span{} : param.type.span});
        for (const auto& [p, f] : files_)
          for (const auto& cmp : f->param_comparisons)
            if (p == sym.file->path && cmp.function == sym.function->name && cmp.param == param.name)
              fam.sites.push_back(cmp.site);
      }
    } else {
      // Property anchors: interfaces in the site files declaring the property.
      std::set<std::string> site_files;
      for (const auto& s : fam.sites) site_files.insert(s.file);
      bool home_set = false;
      for (const auto& sf : site_files) {
        const FileFacts& f = *files_.at(sf);
        for (const auto& iface : f.interfaces)
          for (const auto& p : iface.props) {
            if (p.name != fam.property) continue;
            std::optional<UnionKey> key;
            const auto type = linker.classify({&f, p.type}, key);
            if (type == SubjectType::Union && key) {
              if (const UnionType* u = find_union(*key)) formalized.insert(u->members.begin(), u->members.end());
            } else if (type == SubjectType::Union) {
              formalized.insert(p.type.literals.begin(), p.type.literals.end());
            } else if (type == SubjectType::String) {
              fam.annotation_sites.push_back({f.path, iface.name, p.name, p.name_span, p.type.span});
              if (!home_set) {
                fam.home_file = f.path;
                home_set = true;
              }
            }
          }
      }
    }
    std::erase_if(fam.sites, [&](const LiteralSite& s) { return formalized.count(s.literal) != 0; });
    for (const auto& s : fam.sites)
      if (std::find(fam.literals.begin(), fam.literals.end(), s.literal) == fam.literals.end())
        fam.literals.push_back(s.literal);
    if (fam.literals.size() >= options_.family_min_size && fam.sites.size() >= options_.family_min_sites)
      families_.push_back(std::move(fam));
  }

  // Finite-key object literals.
  for (const auto& [path, f] : files_) {
    const auto& l = *linked_.at(path);
    for (std::size_t i = 0; i < f->objects.size(); ++i) {
      const auto& raw = f->objects[i];
      if (!raw.plain_keys || raw.mapping.keys.empty()) continue;
      MappingLiteral m = raw.mapping;
      const auto& annotated = l.object_annotation_union[i];
      const auto& guarded = l.object_guard_union[i];
      if (annotated) {
        m.intended_key_union = annotated;
        m.explicit_annotation = true;
      } else if (guarded) {
        m.intended_key_union = guarded;
      } else if (m.keys.size() >= 2) {
        std::vector<UnionKey> candidates;
        for (const auto& u : unions_) {
          const bool covered = std::all_of(m.keys.begin(), m.keys.end(), [&](const std::string& k) {
            return std::find(u.members.begin(), u.members.end(), k) != u.members.end();
          });
          if (covered) candidates.push_back(u.key());
        }
        if (candidates.size() == 1) m.intended_key_union = candidates.front();
      }
      if (!m.intended_key_union) continue;
      m.has_satisfies_guard = guarded && *guarded == *m.intended_key_union;
      m.value_type_text = l.object_value_text[i];
      mappings_.push_back(std::move(m));
    }
  }
}

CodebaseIndex build_index(const std::map<std::string, std::string>& files, const IndexOptions& options) {
  CodebaseIndex index;
  index.options_ = options;
  std::vector<std::string> all;
  for (const auto& [path, text] : files) {
    const std::string p = normalize_path(path);
    index.files_[p] = detail::extract_facts(p, text, options.parse);
    ++index.stats_.reparsed;
  }
  for (const auto& [p, _] : index.files_) all.push_back(p);
  index.relink(all);
  index.aggregate();
  return index;
}

CodebaseIndex update_index(const CodebaseIndex& prior,
                           const std::map<std::string, std::optional<std::string>>& changed) {
  CodebaseIndex index = prior;
  index.stats_ = {};
  std::set<std::string> touched;
  for (const auto& [raw_path, text] : changed) {
    const std::string path = normalize_path(raw_path);
    const auto it = index.files_.find(path);
    if (!text) {
      if (it == index.files_.end()) continue;
      index.files_.erase(it);
      index.linked_.erase(path);
      touched.insert(path);
      continue;
    }
    if (it != index.files_.end() && it->second->text == *text) continue;
    index.files_[path] = detail::extract_facts(path, *text, index.options_.parse);
    ++index.stats_.reparsed;
    touched.insert(path);
  }
  if (touched.empty()) return index;
  std::vector<std::string> dirty;
  for (const auto& [path, linked] : index.linked_) {
    const bool depends = std::any_of(linked->deps.begin(), linked->deps.end(),
                                     [&](const std::string& d) { return touched.count(d) != 0; });
    if (depends) dirty.push_back(path);
  }
  for (const auto& path : touched)
    if (index.files_.count(path) && !index.linked_.count(path)) dirty.push_back(path);
  index.relink(dirty);
  index.aggregate();
  return index;
}

std::optional<UnionType> resolve_union(const CodebaseIndex& index, const std::string& name,
                                       const std::string& from_file) {
  Linker linker(index);
  auto sym = linker.resolve_symbol(normalize_path(from_file), name);
  for (int depth = 0; depth < 16 && sym.kind == Linker::Symbol::Kind::Alias; ++depth) {
    if (sym.alias->type.kind != TypeExpr::Kind::Ref) return std::nullopt;
    sym = linker.resolve_symbol(sym.file->path, sym.alias->type.name);
  }
  if (sym.kind != Linker::Symbol::Kind::Union) return std::nullopt;
  return *sym.union_type;
}

std::optional<std::vector<std::string>> parameter_literals(const CodebaseIndex& index, const std::string& from_file,
                                                          const std::string& callee, std::size_t arg_index) {
  Linker linker(index);
  const auto sym = linker.resolve_symbol(normalize_path(from_file), callee);
  if (sym.kind != Linker::Symbol::Kind::Function || arg_index >= sym.function->params.size()) return std::nullopt;
  const auto& param = sym.function->params[arg_index];
  std::optional<UnionKey> key;
  if (linker.classify({sym.file, param.type}, key) != SubjectType::Union) return std::nullopt;
  if (key) {
    if (const UnionType* u = index.find_union(*key)) return u->members;
    return std::nullopt;
  }
  if (param.type.kind == TypeExpr::Kind::Literals) return param.type.literals;
  return std::nullopt;
}

std::map<std::string, std::string> read_source_tree(const std::string& root) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error(ErrorCode::WorkspaceUnreadable, "not a directory: " + root);
  std::map<std::string, std::string> out;
  fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec), end;
  if (ec) throw Error(ErrorCode::WorkspaceUnreadable, "cannot list " + root + ": " + ec.message());
  for (; it != end; it.increment(ec)) {
    if (ec) throw Error(ErrorCode::WorkspaceUnreadable, "cannot list " + root + ": " + ec.message());
    const auto name = it->path().filename().string();
    if (it->is_directory(ec)) {
      if (name == "node_modules" || (!name.empty() && name[0] == '.')) it.disable_recursion_pending();
      continue;
    }
    const auto ext = it->path().extension().string();
    if (ext != ".ts" && ext != ".tsx") continue;
    std::ifstream f(it->path(), std::ios::binary);
    if (!f) throw Error(ErrorCode::WorkspaceUnreadable, "cannot read " + it->path().string());
    std::stringstream ss;
    ss << f.rdbuf();
    out[normalize_path(fs::relative(it->path(), root).generic_string())] = ss.str();
  }
  return out;
}

}  // namespace vibeguard::index
