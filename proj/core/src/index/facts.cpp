#include "index/facts.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>

#include "vibeguard/error.hpp"

namespace vibeguard::index::detail {
namespace {

using syntax::Node;
using syntax::NodeKind;
using syntax::SourceAst;
namespace flags = syntax::flags;

void push_unique(std::vector<std::string>& v, const std::string& s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

bool is_ident_byte(char ch) {
  const auto c = static_cast<unsigned char>(ch);
  return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80;
}

NodeId unwrap_parens(const SourceAst& ast, NodeId id) {
  while (id != kNoNode && ast.node(id).kind == NodeKind::Parenthesized && !ast.node(id).children.empty())
    id = ast.node(id).children[0];
  return id;
}

class FactCollector {
 public:
  FactCollector(const SourceAst& ast, FileFacts& out) : ast_(ast), out_(out) {}

  void run() {
    for (NodeId item : ast_.items()) top_level(item);
    visit(ast_.root(), "<module>");
  }

 private:
  // ------------------------------------------------------------ top level

  void export_name(const Node& n, const std::string& name) {
    if (n.has(flags::kExported) && !name.empty())
      out_.exports.push_back({n.has(flags::kDefault) ? "default" : name, name, ""});
  }

  void top_level(NodeId id) {
    const Node& n = ast_.node(id);
    switch (n.kind) {
      case NodeKind::Import:
        for (NodeId s : n.children) {
          const Node& spec = ast_.node(s);
          out_.imports.push_back({spec.name, spec.value, n.value});
          push_unique(out_.top_level_names, spec.name);
        }
        break;
      case NodeKind::Export:
        if (n.has(flags::kDefault)) break;
        if (n.has(flags::kStar) && n.children.empty()) {
          out_.star_exports.push_back(n.value);
          break;
        }
        for (NodeId s : n.children) {
          const Node& spec = ast_.node(s);
          out_.exports.push_back({spec.name, spec.value, n.value});
        }
        break;
      case NodeKind::TypeAlias: {
        AliasDecl alias{n.name, type_expr(ast_, n.type), n.has(flags::kExported), n.span};
        if (alias.type.kind == TypeExpr::Kind::Literals) {
          out_.unions.push_back({n.name, alias.type.literals, n.span, n.has(flags::kExported), out_.path});
        }
        out_.aliases.push_back(std::move(alias));
        push_unique(out_.top_level_names, n.name);
        export_name(n, n.name);
        break;
      }
      case NodeKind::Interface: {
        InterfaceDecl decl{n.name, object_type_props(ast_, id), n.has(flags::kExported)};
        // Declaration merging: fold repeated interfaces into the first.
        auto it = std::find_if(out_.interfaces.begin(), out_.interfaces.end(),
                               [&](const InterfaceDecl& d) { return d.name == n.name; });
        if (it != out_.interfaces.end()) {
          it->props.insert(it->props.end(), decl.props.begin(), decl.props.end());
          it->exported = it->exported || decl.exported;
        } else {
          out_.interfaces.push_back(std::move(decl));
        }
        push_unique(out_.top_level_names, n.name);
        export_name(n, n.name);
        break;
      }
      case NodeKind::Function:
        if (!n.name.empty()) {
          out_.functions.push_back(function_decl(n.name, id, n.has(flags::kExported)));
          push_unique(out_.top_level_names, n.name);
          export_name(n, n.name);
        }
        break;
      case NodeKind::Variable:
        for (NodeId d : n.children) {
          const Node& decl = ast_.node(d);
          if (decl.name.empty()) continue;
          push_unique(out_.top_level_names, decl.name);
          export_name(n, decl.name);
          if (decl.children.size() > 1) {
            const NodeId init = unwrap_parens(ast_, decl.children[1]);
            if (syntax::is_function_like(ast_.node(init).kind))
              out_.functions.push_back(function_decl(decl.name, init, n.has(flags::kExported)));
          }
        }
        break;
      case NodeKind::OpaqueStatement:
        break;
      default:
        break;
    }
  }

  FunctionDecl function_decl(const std::string& name, NodeId fn, bool exported) {
    FunctionDecl f{name, {}, fn, exported};
    for (NodeId p : syntax::function_params(ast_, fn)) {
      const Node& param = ast_.node(p);
      ParamDecl pd;
      pd.name = param.name;
      pd.type = type_expr(ast_, param.type);
      pd.name_span = param.children.empty() ? param.span : ast_.node(param.children[0]).span;
      f.params.push_back(std::move(pd));
    }
    return f;
  }

  // ------------------------------------------------------------ traversal

  struct Scope {
    NodeId fn;
    std::string name;
  };

  static bool names_decl(const Node& n) {
    return ((n.kind == NodeKind::Function || n.kind == NodeKind::FunctionExpression) && !n.name.empty()) ||
           (n.kind == NodeKind::Declarator && !n.name.empty()) || n.kind == NodeKind::TypeAlias ||
           n.kind == NodeKind::Interface;
  }

  void visit(NodeId id, const std::string& decl) {
    const Node& n = ast_.node(id);
    std::string here = names_decl(n) ? n.name : decl;
    const bool fn = syntax::is_function_like(n.kind);
    if (fn) scopes_.push_back({id, here});

    switch (n.kind) {
      case NodeKind::Switch:
        on_switch(id, here);
        break;
      case NodeKind::If:
        if (!is_else_if(id)) on_if_chain(id, here);
        break;
      case NodeKind::Call:
        on_call(id);
        break;
      case NodeKind::Property:
        if (!n.has(flags::kComputed) && !n.children.empty() &&
            ast_.node(n.children[0]).kind == NodeKind::StringLiteral) {
          const Node& v = ast_.node(n.children[0]);
          out_.literals.push_back({"prop:" + n.name, "", 0, n.name,
                                   {out_.path, v.span, SiteContext::PropertyValue, v.value}});
        }
        break;
      case NodeKind::Binary:
        on_param_comparison(id);
        break;
      case NodeKind::Declarator:
        on_declarator(id, here);
        break;
      default:
        break;
    }

    for (NodeId c : n.children) visit(c, here);
    if (fn) scopes_.pop_back();
  }

  bool is_else_if(NodeId id) const {
    const Node& n = ast_.node(id);
    if (n.parent == kNoNode) return false;
    const Node& p = ast_.node(n.parent);
    return p.kind == NodeKind::If && p.children.size() > 2 && p.children[2] == id;
  }

  // ----------------------------------------------------------- bindings

  /// Finds `name` in an object pattern; fills the property path to it.
  bool find_in_pattern(NodeId pattern, const std::string& name, std::vector<std::string>& path) const {
    const Node& p = ast_.node(pattern);
    if (p.kind == NodeKind::Identifier) return p.name == name;
    if (p.kind != NodeKind::ObjectPattern) return false;
    for (NodeId c : p.children) {
      const Node& b = ast_.node(c);
      if (b.kind != NodeKind::Identifier) continue;
      if (!b.name.empty() && b.name == name) {
        if (!b.value.empty()) path.push_back(b.value);
        return true;
      }
      if (b.name.empty() && !b.children.empty()) {
        path.push_back(b.value);
        if (find_in_pattern(b.children[0], name, path)) return true;
        path.pop_back();
      }
    }
    return false;
  }

  std::optional<BindingType> binding_in_declarators(NodeId root, const std::string& name,
                                                    bool stop_at_functions) const {
    std::optional<BindingType> found;
    syntax::walk(ast_, root, [&](NodeId id, const Node& n) {
      if (found) return false;
      if (id != root && stop_at_functions && syntax::is_function_like(n.kind)) return false;
      if (syntax::is_type_kind(n.kind)) return false;
      if (n.kind == NodeKind::Declarator && !n.children.empty() && n.type != kNoNode) {
        std::vector<std::string> path;
        if (find_in_pattern(n.children[0], name, path)) {
          found = BindingType{type_expr(ast_, n.type), path, true};
          return false;
        }
      }
      return true;
    });
    return found;
  }

  BindingType binding_type(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      for (NodeId p : syntax::function_params(ast_, it->fn)) {
        const Node& param = ast_.node(p);
        if (param.children.empty()) continue;
        std::vector<std::string> path;
        if (find_in_pattern(param.children[0], name, path)) {
          if (param.type == kNoNode) return {};
          return {type_expr(ast_, param.type), path, true};
        }
      }
      const NodeId body = syntax::function_body(ast_, it->fn);
      if (body != kNoNode)
        if (auto b = binding_in_declarators(body, name, true)) return *b;
    }
    for (NodeId item : ast_.items()) {
      if (ast_.node(item).kind != NodeKind::Variable) continue;
      if (auto b = binding_in_declarators(item, name, true)) return *b;
    }
    return {};
  }

  BindingType subject_type(const std::string& path) const {
    if (path.empty()) return {};
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
      const auto dot = path.find('.', start);
      parts.push_back(path.substr(start, dot - start));
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    BindingType b = binding_type(parts[0]);
    if (!b.known) return b;
    b.path.insert(b.path.end(), parts.begin() + 1, parts.end());
    return b;
  }

  // -------------------------------------------------------------- switch

  void on_switch(NodeId id, const std::string& decl) {
    const Node& n = ast_.node(id);
    RawSwitch raw;
    SwitchSite& s = raw.site;
    s.file = out_.path;
    s.span = n.span;
    s.node = id;
    s.enclosing_decl = decl;
    if (!n.children.empty()) {
      const NodeId disc = n.children[0];
      s.discriminant = syntax::member_path(ast_, disc);
      s.discriminant_span = ast_.node(disc).span;
    }
    for (std::size_t i = 1; i < n.children.size(); ++i) {
      const Node& clause = ast_.node(n.children[i]);
      if (clause.kind == NodeKind::CaseClause) {
        const NodeId test = clause.children.empty() ? kNoNode : unwrap_parens(ast_, clause.children[0]);
        if (test != kNoNode && ast_.node(test).kind == NodeKind::StringLiteral)
          push_unique(s.cases, ast_.node(test).value);
        else
          s.has_non_literal_case = true;
      } else if (clause.kind == NodeKind::DefaultClause) {
        s.default_kind = is_assert_never_default(clause, s.discriminant) ? DefaultKind::AssertNever
                                                                          : DefaultKind::Plain;
      }
    }
    s.ordinal = ordinals_[decl + "\x1f" + "switch:" + s.discriminant]++;
    raw.subject = subject_type(s.discriminant);
    out_.switches.push_back(std::move(raw));
  }

  bool is_assert_never_default(const Node& clause, const std::string& discriminant) const {
    std::vector<NodeId> stmts;
    for (NodeId c : clause.children) {
      const Node& s = ast_.node(c);
      if (s.kind == NodeKind::EmptyStatement) continue;
      if (s.kind == NodeKind::Block) {
        for (NodeId b : s.children)
          if (ast_.node(b).kind != NodeKind::EmptyStatement) stmts.push_back(b);
        continue;
      }
      stmts.push_back(c);
    }
    if (stmts.size() != 1 || discriminant.empty()) return false;
    const Node& s = ast_.node(stmts[0]);
    if ((s.kind != NodeKind::ExpressionStatement && s.kind != NodeKind::Return &&
         s.kind != NodeKind::Throw) ||
        s.children.empty())
      return false;
    const Node& call = ast_.node(unwrap_parens(ast_, s.children[0]));
    if (call.kind != NodeKind::Call || call.children.size() != 2) return false;
    const Node& callee = ast_.node(call.children[0]);
    if (callee.kind != NodeKind::Identifier || callee.name != "assertNever") return false;
    return syntax::member_path(ast_, call.children[1]) == discriminant;
  }

  // ----------------------------------------------------------- if chains

  struct ArmTest {
    std::string subject;
    std::string value;
    bool negated = false;
    bool ok = false;
  };

  ArmTest equality_test(NodeId cond) const {
    const Node& b = ast_.node(unwrap_parens(ast_, cond));
    if (b.kind != NodeKind::Binary || b.children.size() != 2) return {};
    if (b.value != "===" && b.value != "!==") return {};
    NodeId lhs = unwrap_parens(ast_, b.children[0]);
    NodeId rhs = unwrap_parens(ast_, b.children[1]);
    if (ast_.node(lhs).kind == NodeKind::StringLiteral) std::swap(lhs, rhs);
    if (ast_.node(rhs).kind != NodeKind::StringLiteral) return {};
    const std::string path = syntax::member_path(ast_, lhs);
    if (path.empty()) return {};
    return {path, ast_.node(rhs).value, b.value == "!==", true};
  }

  void on_if_chain(NodeId root, const std::string& decl) {
    std::vector<std::pair<NodeId, ArmTest>> arms;
    NodeId cur = root;
    bool terminal_else = false;
    while (cur != kNoNode) {
      const Node& n = ast_.node(cur);
      arms.push_back({cur, n.children.empty() ? ArmTest{} : equality_test(n.children[0])});
      if (n.children.size() > 2) {
        const NodeId alt = n.children[2];
        if (ast_.node(alt).kind == NodeKind::If) {
          cur = alt;
          continue;
        }
        terminal_else = true;
      }
      cur = kNoNode;
    }
    std::string subject;
    for (const auto& [_, t] : arms)
      if (t.ok) {
        subject = t.subject;
        break;
      }
    if (subject.empty()) return;

    RawChain raw;
    ComparisonChain& c = raw.chain;
    std::size_t equality_arms = 0;
    for (const auto& [node, t] : arms) {
      if (!t.ok || t.subject != subject) {
        c.mixed_predicates = true;
        continue;
      }
      ++equality_arms;
      if (t.negated) c.has_negated = true;
      push_unique(c.observed_values, t.value);
      c.arms.push_back({t.value, t.negated, node, ast_.node(ast_.node(node).children[0]).span});
    }
    if (equality_arms < 2 || c.observed_values.size() < 2) return;
    c.file = out_.path;
    c.root_node = root;
    c.root_span = ast_.node(root).span;
    c.subject = subject;
    c.has_terminal_else = terminal_else;
    c.has_terminal_else_or_fallthrough = terminal_else || has_following_statement(root);
    c.enclosing_decl = decl;
    c.ordinal = ordinals_[decl + "\x1f" + "chain:" + subject]++;
    raw.subject = subject_type(subject);
    out_.chains.push_back(std::move(raw));
  }

  bool has_following_statement(NodeId id) const {
    const Node& n = ast_.node(id);
    if (n.parent == kNoNode) return false;
    const Node& p = ast_.node(n.parent);
    if (p.kind != NodeKind::Block && p.kind != NodeKind::Module && p.kind != NodeKind::CaseClause &&
        p.kind != NodeKind::DefaultClause)
      return false;
    const auto it = std::find(p.children.begin(), p.children.end(), id);
    for (auto j = it + 1; j < p.children.end(); ++j)
      if (ast_.node(*j).kind != NodeKind::EmptyStatement) return true;
    return false;
  }

  // ------------------------------------------------------------ literals

  void on_call(NodeId id) {
    const Node& n = ast_.node(id);
    if (n.children.empty()) return;
    const std::string callee = syntax::member_path(ast_, n.children[0]);
    if (callee.empty() || callee == "assertNever" || callee == "require") return;
    for (std::size_t i = 1; i < n.children.size(); ++i) {
      const Node& arg = ast_.node(n.children[i]);
      if (arg.kind != NodeKind::StringLiteral) continue;
      const auto index = static_cast<std::uint32_t>(i - 1);
      out_.literals.push_back({"call:" + callee + "#" + std::to_string(index), callee, index, "",
                               {out_.path, arg.span, SiteContext::CallArgument, arg.value}});
    }
  }

  void on_param_comparison(NodeId id) {
    if (scopes_.empty()) return;
    const Node& b = ast_.node(id);
    if ((b.value != "===" && b.value != "!==") || b.children.size() != 2) return;
    NodeId lhs = unwrap_parens(ast_, b.children[0]);
    NodeId rhs = unwrap_parens(ast_, b.children[1]);
    if (ast_.node(lhs).kind == NodeKind::StringLiteral) std::swap(lhs, rhs);
    if (ast_.node(lhs).kind != NodeKind::Identifier || ast_.node(rhs).kind != NodeKind::StringLiteral) return;
    const Scope& scope = scopes_.back();
    for (NodeId p : syntax::function_params(ast_, scope.fn)) {
      if (ast_.node(p).name != ast_.node(lhs).name) continue;
      const Node& lit = ast_.node(rhs);
      out_.param_comparisons.push_back(
          {scope.name, ast_.node(p).name, {out_.path, lit.span, SiteContext::Comparison, lit.value}});
      return;
    }
  }

  // ------------------------------------------------------------- objects

  void on_declarator(NodeId id, const std::string& decl) {
    const Node& d = ast_.node(id);
    if (d.children.size() < 2 || d.name.empty()) return;
    const NodeId init = d.children[1];
    NodeId cur = init;
    std::optional<TypeExpr> guard;
    for (;;) {
      cur = unwrap_parens(ast_, cur);
      const Node& n = ast_.node(cur);
      if ((n.kind == NodeKind::Satisfies || n.kind == NodeKind::As) && !n.children.empty()) {
        if (n.kind == NodeKind::Satisfies && !guard) guard = type_expr(ast_, n.type);
        cur = n.children[0];
        continue;
      }
      break;
    }
    const Node& obj = ast_.node(cur);
    if (obj.kind != NodeKind::ObjectLiteral) return;
    RawObject raw;
    MappingLiteral& m = raw.mapping;
    m.file = out_.path;
    m.span = obj.span;
    m.node = cur;
    m.decl_name = decl;
    m.insert_at = ast_.node(init).span.end;
    for (NodeId c : obj.children) {
      const Node& p = ast_.node(c);
      if (p.kind == NodeKind::Spread || p.has(flags::kComputed)) {
        raw.plain_keys = false;
        continue;
      }
      push_unique(m.keys, p.name);
    }
    if (d.type != kNoNode) raw.annotation = type_expr(ast_, d.type);
    raw.satisfies_type = guard;
    out_.objects.push_back(std::move(raw));
  }

  const SourceAst& ast_;
  FileFacts& out_;
  std::vector<Scope> scopes_;
  std::map<std::string, std::uint32_t> ordinals_;
};

}  // namespace

TypeExpr type_expr(const SourceAst& ast, NodeId id) {
  TypeExpr t;
  if (id == kNoNode) return t;
  const Node& n = ast.node(id);
  t.node = id;
  t.span = n.span;
  switch (n.kind) {
    case NodeKind::KeywordType:
      t.kind = n.name == "string" ? TypeExpr::Kind::String : TypeExpr::Kind::Other;
      break;
    case NodeKind::TypeReference:
      t.kind = TypeExpr::Kind::Ref;
      t.name = n.name;
      break;
    case NodeKind::ObjectType:
      t.kind = TypeExpr::Kind::Object;
      break;
    case NodeKind::LiteralType:
      if (n.has(flags::kStringKey)) {
        t.kind = TypeExpr::Kind::Literals;
        t.literals.push_back(n.value);
      } else {
        t.kind = TypeExpr::Kind::Other;
      }
      break;
    case NodeKind::UnionType: {
      t.kind = TypeExpr::Kind::Literals;
      for (NodeId c : n.children) {
        const Node& m = ast.node(c);
        if (m.kind != NodeKind::LiteralType || !m.has(flags::kStringKey)) {
          t.kind = TypeExpr::Kind::Other;
          t.literals.clear();
          break;
        }
        push_unique(t.literals, m.value);
      }
      break;
    }
    default:
      t.kind = TypeExpr::Kind::Other;
      break;
  }
  return t;
}

std::vector<PropDecl> object_type_props(const SourceAst& ast, NodeId object_type) {
  std::vector<PropDecl> props;
  const std::string_view text = ast.text();
  for (NodeId c : ast.node(object_type).children) {
    const Node& p = ast.node(c);
    if (p.kind != NodeKind::PropertySignature) continue;
    // The key is the signature's first token.
    std::uint32_t end = p.span.start;
    if (end < p.span.end && (text[end] == '\'' || text[end] == '"')) {
      const char q = text[end++];
      while (end < p.span.end && text[end] != q) ++end;
      if (end < p.span.end) ++end;
    } else {
      while (end < p.span.end && is_ident_byte(text[end])) ++end;
    }
    props.push_back({p.name, type_expr(ast, p.type), ast.make_span(p.span.start, end)});
  }
  return props;
}

std::string dirname(std::string_view path) {
  const auto slash = path.rfind('/');
  return slash == std::string_view::npos ? std::string() : std::string(path.substr(0, slash));
}

std::shared_ptr<const FileFacts> extract_facts(const std::string& path, const std::string& text,
                                               const syntax::ParseOptions& options) {
  auto facts = std::make_shared<FileFacts>();
  facts->path = path;
  facts->text = text;
  try {
    auto result = syntax::parse_file(path, text, options);
    facts->ast = std::make_shared<const SourceAst>(std::move(result.ast));
    facts->diagnostics = std::move(result.diagnostics);
  } catch (const Error& e) {
    facts->failure = e.what();
    return facts;
  }
  FactCollector(*facts->ast, *facts).run();
  return facts;
}

}  // namespace vibeguard::index::detail
