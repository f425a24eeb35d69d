#include <algorithm>
#include <deque>
#include <string>
#include <utility>

#include "syntax/lexer.hpp"
#include "vibeguard/error.hpp"
#include "vibeguard/syntax.hpp"

namespace vibeguard::syntax {
namespace {

using detail::Lexed;
using detail::Lexer;

bool is_keyword(std::string_view s) {
  static constexpr std::string_view kReserved[] = {
      "break",  "case",   "catch",   "class",  "const",      "continue", "debugger",
      "default", "delete", "do",     "else",   "enum",       "export",   "extends",
      "false",  "finally", "for",    "function", "if",       "import",   "in",
      "instanceof", "new", "null",   "return", "super",      "switch",   "this",
      "throw",  "true",   "try",     "typeof", "var",        "void",     "while",
      "with"};
  return std::find(std::begin(kReserved), std::end(kReserved), s) != std::end(kReserved);
}

int binary_precedence(std::string_view op) {
  if (op == "??") return 1;
  if (op == "||") return 2;
  if (op == "&&") return 3;
  if (op == "|") return 4;
  if (op == "^") return 5;
  if (op == "&") return 6;
  if (op == "==" || op == "!=" || op == "===" || op == "!==") return 7;
  if (op == "<" || op == ">" || op == "<=" || op == ">=" || op == "instanceof" || op == "in" ||
      op == "as" || op == "satisfies")
    return 8;
  if (op == "<<" || op == ">>" || op == ">>>") return 9;
  if (op == "+" || op == "-") return 10;
  if (op == "*" || op == "/" || op == "%") return 11;
  if (op == "**") return 12;
  return -1;
}

bool is_assignment_op(std::string_view op) {
  return op == "=" || op == "+=" || op == "-=" || op == "*=" || op == "/=" || op == "%=" ||
         op == "**=" || op == "<<=" || op == ">>=" || op == ">>>=" || op == "&=" || op == "|=" ||
         op == "^=" || op == "&&=" || op == "||=" || op == "?\?=";
}

std::string decode_string(std::string_view raw) {
  if (raw.size() < 2) return {};
  const char quote = raw.front();
  std::string_view body = raw.substr(1);
  if (!body.empty() && body.back() == quote) body.remove_suffix(1);
  std::string out;
  out.reserve(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] != '\\' || i + 1 == body.size()) {
      out.push_back(body[i]);
      continue;
    }
    const char e = body[++i];
    switch (e) {
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case 'r': out.push_back('\r'); break;
      case '0': out.push_back('\0'); break;
      case '\n': break;
      default: out.push_back(e); break;
    }
  }
  return out;
}

struct JsxScan {
  std::uint32_t end = 0;
  bool ok = false;
  std::string tag;
  struct Attr {
    std::string name;
    Span name_span;
    Span value_span;
    bool string_value = false;
  };
  std::vector<Attr> attrs;
  std::vector<Span> texts;
};

class Parser {
 public:
  Parser(std::string path, std::string_view src, bool jsx)
      : path_(std::move(path)), src_(src), lex_(src), jsx_(jsx) {
    line_starts_.push_back(0);
    for (std::uint32_t i = 0; i < src_.size(); ++i)
      if (src_[i] == '\n') line_starts_.push_back(i + 1);
  }

  ParseResult run(std::string source) {
    const NodeId root = open(NodeKind::Module, 0);
    while (!at_end()) {
      const std::uint32_t before = cur().span.start;
      const std::size_t log_before = log_.size();
      const NodeId item = parse_statement();
      add_child(root, item);
      if (cur().span.start == before && log_.size() == log_before) skip_one("unexpected token");
    }
    flush_end_trivia();
    nodes_[root].span = span(0, static_cast<std::uint32_t>(src_.size()));
    link_parents();
    SourceAst ast(std::move(path_), std::move(source), std::move(nodes_), std::move(log_),
                  std::move(line_starts_));
    return {std::move(ast), std::move(diags_)};
  }

 private:
  // ---------------------------------------------------------------- tokens

  const Lexed& peek(std::size_t n = 0) {
    while (ahead_.size() <= n) {
      ahead_.push_back(lex_.next());
      if (ahead_.back().token.kind == TokenKind::End) {
        while (ahead_.size() <= n) ahead_.push_back(ahead_.back());
      }
    }
    return ahead_[n];
  }
  const Token& cur() { return peek().token; }
  std::string_view text_of(const Token& t) const {
    return src_.substr(t.span.start, t.span.end - t.span.start);
  }
  std::string_view cur_text() { return text_of(cur()); }
  bool at_end() { return cur().kind == TokenKind::End; }
  bool at(std::string_view s) {
    const Token& t = cur();
    return (t.kind == TokenKind::Punct || t.kind == TokenKind::Identifier) && text_of(t) == s;
  }
  bool at_ahead(std::size_t n, std::string_view s) {
    const Token& t = peek(n).token;
    return (t.kind == TokenKind::Punct || t.kind == TokenKind::Identifier) && text_of(t) == s;
  }
  bool at_ident() { return cur().kind == TokenKind::Identifier; }
  bool newline_before() { return peek().newline_before; }

  Span span(std::uint32_t start, std::uint32_t end) const {
    Span s{start, end, 1, 1};
    const auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), start);
    const auto line = static_cast<std::uint32_t>(it - line_starts_.begin());
    s.line = line;
    // Spans arrive mostly in source order; resume counting from the last one.
    std::uint32_t from = line_starts_[line - 1];
    std::uint32_t col = 1;
    if (col_cache_line_ == line && col_cache_off_ <= start) {
      from = col_cache_off_;
      col = col_cache_col_;
    }
    for (std::uint32_t i = from; i < start && i < src_.size(); ++i)
      if ((static_cast<unsigned char>(src_[i]) & 0xC0) != 0x80) ++col;
    col_cache_line_ = line;
    col_cache_off_ = start;
    col_cache_col_ = col;
    s.col = col;
    return s;
  }

  void log_token(Token t) {
    t.span = span(t.span.start, t.span.end);
    log_.push_back(t);
  }

  Token advance() {
    Lexed l = peek();
    ahead_.pop_front();
    for (const Token& t : l.trivia) log_token(t);
    if (l.token.kind == TokenKind::End) {
      // Keep End in the lookahead so at_end() stays true.
      ahead_.push_front(Lexed{l.token, {}, l.newline_before, {}});
      return l.token;
    }
    if (l.problem) diag(l.token.span.start, l.token.span.end, *l.problem);
    log_token(l.token);
    prev_end_ = l.token.span.end;
    return l.token;
  }

  /// Replaces the current token with a context-scanned one ending at `end`.
  void consume_special(TokenKind kind, std::uint32_t end) {
    const Lexed l = peek();
    for (const Token& t : l.trivia) log_token(t);
    log_token({kind, {l.token.span.start, end}});
    prev_end_ = end;
    ahead_.clear();
    lex_.seek(end);
  }

  void flush_end_trivia() {
    const Lexed l = peek();
    for (const Token& t : l.trivia) log_token(t);
    if (l.problem) diag(l.token.span.start, l.token.span.end, *l.problem);
  }

  bool eat(std::string_view s) {
    if (!at(s)) return false;
    advance();
    return true;
  }

  void expect(std::string_view s) {
    if (eat(s)) return;
    diag(cur().span.start, cur().span.end, "expected '" + std::string(s) + "'");
  }

  void diag(std::uint32_t start, std::uint32_t end, std::string message) {
    diags_.push_back({span(start, end), std::move(message)});
  }

  // Glues adjacent '>' tokens produced by the lexer back into one operator.
  std::string_view greater_op_at() {
    if (!at(">")) return {};
    const std::uint32_t s = cur().span.start;
    std::string_view rest = src_.substr(s);
    for (std::string_view op : {">>>=", ">>>", ">>=", ">>", ">=", ">"})
      if (rest.starts_with(op)) return op;
    return ">";
  }
  void consume_glued(std::string_view op) {
    std::uint32_t consumed = 0;
    while (consumed < op.size()) {
      consumed += cur().span.size();
      advance();
    }
  }

  struct Checkpoint {
    std::uint32_t lex_pos;
    std::deque<Lexed> ahead;
    std::size_t nodes, log, diags;
    std::uint32_t prev_end;
  };
  Checkpoint save() { return {lex_.pos(), ahead_, nodes_.size(), log_.size(), diags_.size(), prev_end_}; }
  void restore(const Checkpoint& c) {
    lex_.seek(c.lex_pos);
    ahead_ = c.ahead;
    nodes_.resize(c.nodes);
    log_.resize(c.log);
    diags_.resize(c.diags);
    prev_end_ = c.prev_end;
  }

  // ----------------------------------------------------------------- nodes

  NodeId open(NodeKind kind, std::uint32_t start) {
    Node n;
    n.kind = kind;
    n.span = span(start, start);
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
  }
  NodeId open(NodeKind kind) { return open(kind, cur().span.start); }
  NodeId close(NodeId id) {
    Node& n = nodes_[id];
    n.span = span(n.span.start, std::max(n.span.start, prev_end_));
    return id;
  }
  void add_child(NodeId parent, NodeId child) {
    if (child != kNoNode) nodes_[parent].children.push_back(child);
  }
  Node& at_node(NodeId id) { return nodes_[id]; }

  void link_parents() {
    for (NodeId i = 0; i < nodes_.size(); ++i) {
      for (NodeId c : nodes_[i].children) nodes_[c].parent = i;
      if (nodes_[i].type != kNoNode) nodes_[nodes_[i].type].parent = i;
    }
    // Recovery can leave an empty node just past its parent; widen parents
    // post-order so spans always nest.
    std::vector<std::pair<NodeId, bool>> stack{{0, false}};
    while (!stack.empty()) {
      auto [id, visited] = stack.back();
      stack.pop_back();
      Node& n = nodes_[id];
      if (!visited) {
        stack.push_back({id, true});
        for (NodeId c : n.children) stack.push_back({c, false});
        if (n.type != kNoNode) stack.push_back({n.type, false});
        continue;
      }
      std::uint32_t lo = n.span.start, hi = n.span.end;
      auto cover = [&](NodeId c) {
        lo = std::min(lo, nodes_[c].span.start);
        hi = std::max(hi, nodes_[c].span.end);
      };
      for (NodeId c : n.children) cover(c);
      if (n.type != kNoNode) cover(n.type);
      if (lo != n.span.start || hi != n.span.end) n.span = span(lo, hi);
    }
  }

  // --------------------------------------------------------------- recovery

  NodeId skip_one(std::string message) {
    const NodeId id = open(NodeKind::OpaqueStatement);
    diag(cur().span.start, cur().span.end, std::move(message));
    advance();
    return close(id);
  }

  static bool starts_statement(std::string_view s) {
    return s == "import" || s == "export" || s == "function" || s == "const" || s == "let" ||
           s == "var" || s == "type" || s == "interface" || s == "class" || s == "if" ||
           s == "switch" || s == "return" || s == "enum" || s == "declare";
  }

  /// Balanced skip to the end of a statement the parser does not model.
  void skip_statement_tokens() {
    int depth = 0;
    bool consumed = false;
    while (!at_end()) {
      const std::string_view t = cur_text();
      const bool punct = cur().kind == TokenKind::Punct;
      if (depth == 0 && consumed && newline_before() && cur().kind == TokenKind::Identifier &&
          starts_statement(t))
        break;
      if (punct && depth == 0 && t == ";") {
        advance();
        break;
      }
      if (punct && (t == "}" || t == ")" || t == "]") && depth == 0) {
        if (!consumed) advance();
        break;
      }
      if (punct && (t == "{" || t == "(" || t == "[")) ++depth;
      if (punct && (t == "}" || t == ")" || t == "]")) {
        --depth;
        advance();
        consumed = true;
        if (depth == 0 && t == "}" && (newline_before() || at_end() || at("}") || at(";"))) {
          eat(";");
          break;
        }
        continue;
      }
      advance();
      consumed = true;
    }
  }

  NodeId opaque_statement(std::string_view what) {
    const NodeId id = open(NodeKind::OpaqueStatement);
    diag(cur().span.start, cur().span.end, "unsupported construct '" + std::string(what) + "'");
    skip_statement_tokens();
    return close(id);
  }

  /// Skips a balanced group starting at the current opener.
  void skip_group() {
    const std::string_view open_tok = cur_text();
    const std::string_view close_tok = open_tok == "(" ? ")" : open_tok == "[" ? "]" : open_tok == "<" ? ">" : "}";
    int depth = 0;
    while (!at_end()) {
      if (at(open_tok)) ++depth;
      if (at(close_tok)) {
        --depth;
        advance();
        if (depth == 0) return;
        continue;
      }
      // Stop at an unbalanced brace when skipping angle brackets.
      if (open_tok == "<" && (at(";") || at("{") || at("}"))) return;
      advance();
    }
    diag(prev_end_, prev_end_, "unterminated '" + std::string(open_tok) + "'");
  }

  /// Skips to the next separator/closer at depth 0 inside a list.
  void recover_in_list(std::string_view closer) {
    int depth = 0;
    while (!at_end()) {
      const std::string_view t = cur_text();
      if (cur().kind == TokenKind::Punct) {
        if (depth == 0 && (t == "," || t == closer)) return;
        if (depth == 0 && (t == ";" || t == "}" || t == ")" || t == "]")) return;
        if (t == "{" || t == "(" || t == "[") ++depth;
        if (t == "}" || t == ")" || t == "]") --depth;
      }
      advance();
    }
  }

  // ------------------------------------------------------------ statements

  void end_statement() {
    if (eat(";")) return;
    if (at_end() || at("}") || newline_before()) return;
    diag(cur().span.start, cur().span.end, "expected ';'");
    skip_statement_tokens();
  }

  NodeId parse_statement() {
    if (at_end()) return kNoNode;
    const std::string_view t = cur_text();
    if (cur().kind == TokenKind::Punct) {
      if (t == "{") return parse_block();
      if (t == ";") {
        const NodeId id = open(NodeKind::EmptyStatement);
        advance();
        return close(id);
      }
      if (t == "@") return opaque_statement("decorator");
    }
    if (cur().kind == TokenKind::Identifier && !peek(1).newline_before && text_of(peek(1).token) == ":" &&
        peek(1).token.kind == TokenKind::Punct && !is_keyword(t)) {
      // labelled statement
      const NodeId id = open(NodeKind::OpaqueStatement);
      advance();
      advance();
      add_child(id, parse_statement());
      return close(id);
    }
    if (cur().kind == TokenKind::Identifier) {
      if (t == "import" && !at_ahead(1, "(") && !at_ahead(1, ".")) return parse_import();
      if (t == "export") return parse_export();
      if (t == "function") return parse_function(NodeKind::Function, 0);
      if (t == "async" && at_ahead(1, "function") && !peek(1).newline_before) {
        advance();
        return parse_function(NodeKind::Function, flags::kAsync);
      }
      if ((t == "const" && at_ahead(1, "enum"))) return opaque_statement("const enum");
      if (t == "const" || t == "var" || (t == "let" && (peek(1).token.kind == TokenKind::Identifier ||
                                                         at_ahead(1, "{") || at_ahead(1, "["))))
        return parse_variable(0);
      if (t == "type" && peek(1).token.kind == TokenKind::Identifier && !peek(1).newline_before)
        return parse_type_alias(0);
      if (t == "interface" && peek(1).token.kind == TokenKind::Identifier && !peek(1).newline_before)
        return parse_interface(0);
      if (t == "if") return parse_if();
      if (t == "switch") return parse_switch();
      if (t == "return") return parse_return();
      if (t == "throw") {
        const NodeId id = open(NodeKind::Throw);
        advance();
        add_child(id, parse_expression());
        end_statement();
        return close(id);
      }
      if (t == "break" || t == "continue") {
        const NodeId id = open(t == "break" ? NodeKind::Break : NodeKind::Continue);
        advance();
        if (at_ident() && !newline_before() && !is_keyword(cur_text())) {
          at_node(id).name = std::string(cur_text());
          advance();
        }
        end_statement();
        return close(id);
      }
      if (t == "for" || t == "while" || t == "do") return parse_loop();
      if (t == "try") return parse_try();
      if (t == "debugger") {
        const NodeId id = open(NodeKind::EmptyStatement);
        advance();
        end_statement();
        return close(id);
      }
      if (t == "class" || t == "enum" || t == "namespace" || t == "module" || t == "declare" ||
          (t == "abstract" && at_ahead(1, "class")) || t == "with") {
        if (t == "namespace" || t == "module" || t == "declare" || t == "abstract")
          if (peek(1).newline_before) return parse_expression_statement();
        return opaque_statement(t);
      }
    }
    return parse_expression_statement();
  }

  NodeId parse_expression_statement() {
    const NodeId id = open(NodeKind::ExpressionStatement);
    const std::uint32_t before = cur().span.start;
    const std::size_t log_before = log_.size();
    const std::size_t diags_before = diags_.size();
    add_child(id, parse_expression());
    if (cur().span.start == before && log_.size() == log_before) {
      // Nothing parsed: turn it into an opaque statement that consumes input.
      nodes_.resize(id);
      diags_.resize(diags_before);
      return skip_one("unexpected token '" + std::string(cur_text()) + "'");
    }
    end_statement();
    return close(id);
  }

  NodeId parse_block() {
    const NodeId id = open(NodeKind::Block);
    expect("{");
    while (!at_end() && !at("}")) {
      const std::uint32_t before = cur().span.start;
      const std::size_t log_before = log_.size();
      add_child(id, parse_statement());
      if (cur().span.start == before && log_.size() == log_before) add_child(id, skip_one("unexpected token"));
    }
    if (!eat("}")) diag(prev_end_, prev_end_, "unterminated block");
    return close(id);
  }

  NodeId parse_return() {
    const NodeId id = open(NodeKind::Return);
    advance();
    if (!at(";") && !at("}") && !at_end() && !newline_before()) add_child(id, parse_expression());
    end_statement();
    return close(id);
  }

  NodeId parse_if() {
    const NodeId id = open(NodeKind::If);
    advance();
    expect("(");
    add_child(id, parse_expression());
    expect(")");
    add_child(id, parse_statement());
    if (at(";") && at_ahead(1, "else")) {
      diag(cur().span.start, cur().span.end, "stray ';' before 'else'");
      at_node(id).flags |= flags::kStraySemicolon;
      advance();
    }
    if (eat("else")) add_child(id, parse_statement());
    return close(id);
  }

  NodeId parse_switch() {
    const NodeId id = open(NodeKind::Switch);
    advance();
    expect("(");
    add_child(id, parse_expression());
    expect(")");
    if (!eat("{")) {
      diag(cur().span.start, cur().span.end, "expected '{' after switch");
      return close(id);
    }
    while (!at_end() && !at("}")) {
      if (at("case") || at("default")) {
        const bool is_case = at("case");
        const NodeId clause = open(is_case ? NodeKind::CaseClause : NodeKind::DefaultClause);
        advance();
        if (is_case) add_child(clause, parse_expression());
        expect(":");
        while (!at_end() && !at("}") && !at("case") && !at("default")) {
          const std::uint32_t before = cur().span.start;
          const std::size_t log_before = log_.size();
          add_child(clause, parse_statement());
          if (cur().span.start == before && log_.size() == log_before) add_child(clause, skip_one("unexpected token"));
        }
        add_child(id, close(clause));
      } else {
        skip_one("expected 'case' or 'default'");
        // stray tokens are attached nowhere but stay in the token stream
        nodes_.pop_back();
      }
    }
    if (!eat("}")) diag(prev_end_, prev_end_, "unterminated switch");
    return close(id);
  }

  NodeId parse_loop() {
    const NodeId id = open(NodeKind::Loop);
    const std::string_view kw = cur_text();
    at_node(id).name = std::string(kw);
    advance();
    if (kw == "do") {
      add_child(id, parse_statement());
      if (eat("while")) {
        expect("(");
        add_child(id, parse_expression());
        expect(")");
      }
      eat(";");
      return close(id);
    }
    eat("await");
    if (kw == "while") {
      expect("(");
      add_child(id, parse_expression());
      expect(")");
    } else if (at("(")) {
      skip_group();
    } else {
      diag(cur().span.start, cur().span.end, "expected '('");
    }
    add_child(id, parse_statement());
    return close(id);
  }

  NodeId parse_try() {
    const NodeId id = open(NodeKind::Try);
    advance();
    add_child(id, parse_block());
    if (eat("catch")) {
      if (at("(")) skip_group();
      add_child(id, parse_block());
    }
    if (eat("finally")) add_child(id, parse_block());
    return close(id);
  }

  // --------------------------------------------------------- declarations

  std::string parse_string_value() {
    const std::string value = decode_string(cur_text());
    advance();
    return value;
  }

  NodeId parse_import() {
    const NodeId id = open(NodeKind::Import);
    advance();
    if (at("type") && !at_ahead(1, "from") && !at_ahead(1, ",")) {
      at_node(id).flags |= flags::kTypeOnly;
      advance();
    }
    if (cur().kind == TokenKind::String) {
      at_node(id).value = parse_string_value();
      end_statement();
      return close(id);
    }
    if (at_ident() && !at("from") && !at("{") && !at("*")) {
      if (at_ahead(1, "=")) {
        nodes_.resize(id);
        return opaque_statement("import = require");
      }
      const NodeId spec = open(NodeKind::ImportSpecifier);
      at_node(spec).name = std::string(cur_text());
      at_node(spec).value = "default";
      advance();
      add_child(id, close(spec));
      eat(",");
    }
    if (at("*")) {
      const NodeId spec = open(NodeKind::ImportSpecifier);
      advance();
      expect("as");
      at_node(spec).name = std::string(cur_text());
      at_node(spec).value = "*";
      if (at_ident()) advance();
      add_child(id, close(spec));
    } else if (at("{")) {
      advance();
      while (!at_end() && !at("}")) {
        const NodeId spec = open(NodeKind::ImportSpecifier);
        if (at("type") && peek(1).token.kind == TokenKind::Identifier && !at_ahead(1, "as")) {
          at_node(spec).flags |= flags::kTypeOnly;
          advance();
        }
        if (!at_ident() && cur().kind != TokenKind::String) {
          diag(cur().span.start, cur().span.end, "expected import name");
          nodes_.resize(spec);
          recover_in_list("}");
          if (!eat(",")) break;
          continue;
        }
        const std::string imported = cur().kind == TokenKind::String ? decode_string(cur_text()) : std::string(cur_text());
        advance();
        std::string local = imported;
        if (eat("as") && at_ident()) {
          local = std::string(cur_text());
          advance();
        }
        at_node(spec).name = local;
        at_node(spec).value = imported;
        add_child(id, close(spec));
        if (!eat(",")) break;
      }
      expect("}");
    }
    expect("from");
    if (cur().kind == TokenKind::String) at_node(id).value = parse_string_value();
    else diag(cur().span.start, cur().span.end, "expected module specifier");
    if (at("assert") || at("with")) {
      advance();
      if (at("{")) skip_group();
    }
    end_statement();
    return close(id);
  }

  NodeId parse_export() {
    const std::uint32_t start = cur().span.start;
    advance();
    if (at("default")) {
      advance();
      if (at("function") || (at("async") && at_ahead(1, "function"))) {
        const std::uint32_t fl = at("async") ? flags::kAsync : 0;
        if (fl) advance();
        const NodeId fn = parse_function(NodeKind::Function, fl);
        at_node(fn).flags |= flags::kExported | flags::kDefault;
        at_node(fn).span = span(start, at_node(fn).span.end);
        return fn;
      }
      if (at("class") || at("abstract")) {
        const NodeId id = opaque_statement("class");
        at_node(id).span = span(start, at_node(id).span.end);
        at_node(id).flags |= flags::kExported | flags::kDefault;
        return id;
      }
      const NodeId id = open(NodeKind::Export, start);
      at_node(id).flags |= flags::kDefault;
      add_child(id, parse_expression());
      end_statement();
      return close(id);
    }
    if (at("{") || at("*") || (at("type") && (at_ahead(1, "{") || at_ahead(1, "*")))) {
      const NodeId id = open(NodeKind::Export, start);
      if (eat("type")) at_node(id).flags |= flags::kTypeOnly;
      if (eat("*")) {
        at_node(id).flags |= flags::kStar;
        if (eat("as")) {
          const NodeId spec = open(NodeKind::ExportSpecifier);
          at_node(spec).name = std::string(cur_text());
          at_node(spec).value = "*";
          if (at_ident() || cur().kind == TokenKind::String) advance();
          add_child(id, close(spec));
        }
      } else {
        advance();  // {
        while (!at_end() && !at("}")) {
          if (!at_ident() && cur().kind != TokenKind::String) {
            diag(cur().span.start, cur().span.end, "expected export name");
            recover_in_list("}");
            if (!eat(",")) break;
            continue;
          }
          const NodeId spec = open(NodeKind::ExportSpecifier);
          if (at("type") && peek(1).token.kind == TokenKind::Identifier && !at_ahead(1, "as")) advance();
          const std::string local = cur().kind == TokenKind::String ? decode_string(cur_text()) : std::string(cur_text());
          advance();
          std::string exported = local;
          if (eat("as")) {
            exported = cur().kind == TokenKind::String ? decode_string(cur_text()) : std::string(cur_text());
            advance();
          }
          at_node(spec).name = exported;
          at_node(spec).value = local;
          add_child(id, close(spec));
          if (!eat(",")) break;
        }
        expect("}");
      }
      if (eat("from")) {
        if (cur().kind == TokenKind::String) at_node(id).value = parse_string_value();
        else diag(cur().span.start, cur().span.end, "expected module specifier");
      }
      end_statement();
      return close(id);
    }
    NodeId decl = kNoNode;
    if (at("=")) {
      return opaque_statement("export =");
    }
    decl = parse_statement();
    if (decl == kNoNode) return decl;
    Node& n = at_node(decl);
    n.flags |= flags::kExported;
    n.span = span(start, n.span.end);
    return decl;
  }

  NodeId parse_type_alias(std::uint32_t fl) {
    const NodeId id = open(NodeKind::TypeAlias);
    at_node(id).flags |= fl;
    advance();  // type
    at_node(id).name = std::string(cur_text());
    advance();
    if (at("<")) skip_group();
    expect("=");
    at_node(id).type = parse_type();
    end_statement();
    return close(id);
  }

  NodeId parse_interface(std::uint32_t fl) {
    const NodeId id = open(NodeKind::Interface);
    at_node(id).flags |= fl;
    advance();  // interface
    at_node(id).name = std::string(cur_text());
    advance();
    if (at("<")) skip_group();
    if (eat("extends")) {
      // Heritage clauses are not modelled; drop their nodes.
      const std::size_t mark = nodes_.size();
      do parse_type_primary();
      while (eat(","));
      nodes_.resize(mark);
    }
    parse_type_members(id);
    return close(id);
  }

  /// `{ member; member }` for interfaces and object types.
  void parse_type_members(NodeId owner) {
    if (!eat("{")) {
      diag(cur().span.start, cur().span.end, "expected '{'");
      return;
    }
    while (!at_end() && !at("}")) {
      if (eat(";") || eat(",")) continue;
      const std::uint32_t before = cur().span.start;
      add_child(owner, parse_type_member());
      if (cur().span.start == before) {
        diag(cur().span.start, cur().span.end, "unexpected token in type");
        advance();
      }
    }
    expect("}");
  }

  NodeId parse_type_member() {
    eat("readonly");
    const bool name_like = at_ident() || cur().kind == TokenKind::String || cur().kind == TokenKind::Number;
    if (name_like && !at_ahead(1, "(") && !at_ahead(1, "<")) {
      const NodeId id = open(NodeKind::PropertySignature);
      at_node(id).name = cur().kind == TokenKind::String ? decode_string(cur_text()) : std::string(cur_text());
      advance();
      if (eat("?")) at_node(id).flags |= flags::kOptional;
      if (eat(":")) at_node(id).type = parse_type();
      return close(id);
    }
    // methods, call/construct/index signatures, mapped types
    const NodeId id = open(NodeKind::OpaqueType);
    int depth = 0;
    while (!at_end()) {
      if (depth == 0 && (at(";") || at(",") || at("}"))) break;
      if (depth == 0 && newline_before() && prev_end_ > at_node(id).span.start) break;
      if (at("{") || at("(") || at("[")) ++depth;
      if (at("}") || at(")") || at("]")) --depth;
      advance();
    }
    return close(id);
  }

  NodeId parse_function(NodeKind kind, std::uint32_t fl) {
    const NodeId id = open(kind);
    at_node(id).flags |= fl;
    expect("function");
    eat("*");
    if (at_ident() && !at("(")) {
      at_node(id).name = std::string(cur_text());
      advance();
    }
    if (at("<")) skip_group();
    parse_params(id);
    if (eat(":")) at_node(id).type = parse_type(/*allow_predicate=*/true);
    if (at("{")) {
      add_child(id, parse_block());
      at_node(id).flags |= flags::kHasBody;
    } else {
      end_statement();
    }
    return close(id);
  }

  void parse_params(NodeId fn) {
    if (!eat("(")) {
      diag(cur().span.start, cur().span.end, "expected '('");
      return;
    }
    while (!at_end() && !at(")")) {
      const NodeId p = open(NodeKind::Parameter);
      while (at("@")) {
        advance();
        parse_call_member();
      }
      while ((at("public") || at("private") || at("protected") || at("readonly") || at("override")) &&
             peek(1).token.kind != TokenKind::Punct)
        advance();
      if (eat("...")) at_node(p).flags |= flags::kRest;
      const NodeId binding = parse_binding();
      if (binding == kNoNode) {
        diag(cur().span.start, cur().span.end, "expected parameter");
        nodes_.resize(p);
        recover_in_list(")");
        if (!eat(",")) break;
        continue;
      }
      add_child(p, binding);
      if (at_node(binding).kind == NodeKind::Identifier) at_node(p).name = at_node(binding).name;
      if (eat("?")) at_node(p).flags |= flags::kOptional;
      if (eat(":")) at_node(p).type = parse_type(true);
      if (eat("=")) add_child(p, parse_assignment());
      add_child(fn, close(p));
      if (!at(",") && !at(")")) {
        diag(cur().span.start, cur().span.end, "expected ',' or ')'");
        recover_in_list(")");
      }
      if (!eat(",")) break;
    }
    expect(")");
  }

  NodeId parse_binding() {
    if (at("{")) {
      const NodeId id = open(NodeKind::ObjectPattern);
      advance();
      while (!at_end() && !at("}")) {
        if (eat("...")) {
          if (at_ident()) {
            const NodeId b = open(NodeKind::Identifier);
            at_node(b).name = std::string(cur_text());
            advance();
            add_child(id, close(b));
          }
        } else if (at_ident() || cur().kind == TokenKind::String) {
          const NodeId b = open(NodeKind::Identifier);
          const std::string key = cur().kind == TokenKind::String ? decode_string(cur_text()) : std::string(cur_text());
          advance();
          at_node(b).value = key;
          at_node(b).name = key;
          if (eat(":")) {
            if (at_ident()) {
              at_node(b).name = std::string(cur_text());
              advance();
            } else {
              // nested pattern
              at_node(b).name.clear();
              const NodeId inner = parse_binding();
              add_child(b, inner);
            }
          }
          if (eat("=")) add_child(b, parse_assignment());
          add_child(id, close(b));
        } else {
          diag(cur().span.start, cur().span.end, "unexpected token in pattern");
          recover_in_list("}");
        }
        if (!eat(",")) break;
      }
      expect("}");
      return close(id);
    }
    if (at("[")) {
      const NodeId id = open(NodeKind::ArrayPattern);
      skip_group();
      return close(id);
    }
    if (at_ident() && !(is_keyword(cur_text()) && !at("this"))) {
      const NodeId id = open(NodeKind::Identifier);
      at_node(id).name = std::string(cur_text());
      advance();
      return close(id);
    }
    return kNoNode;
  }

  NodeId parse_variable(std::uint32_t fl) {
    const NodeId id = open(NodeKind::Variable);
    const std::string_view kw = cur_text();
    at_node(id).flags |= fl | (kw == "const" ? flags::kConst : kw == "let" ? flags::kLet : flags::kVar);
    advance();
    do {
      const NodeId d = open(NodeKind::Declarator);
      const NodeId binding = parse_binding();
      if (binding == kNoNode) {
        diag(cur().span.start, cur().span.end, "expected variable name");
        nodes_.resize(d);
        skip_statement_tokens();
        return close(id);
      }
      add_child(d, binding);
      if (at_node(binding).kind == NodeKind::Identifier) at_node(d).name = at_node(binding).name;
      eat("!");
      if (eat(":")) at_node(d).type = parse_type();
      if (eat("=")) add_child(d, parse_assignment());
      add_child(id, close(d));
    } while (eat(","));
    end_statement();
    return close(id);
  }

  // ----------------------------------------------------------------- types

  NodeId parse_type(bool allow_predicate = false) {
    const std::uint32_t start = cur().span.start;
    if (allow_predicate && (at_ident() || at("asserts")) && at_ahead(1, "is") && !peek(1).newline_before) {
      const NodeId id = open(NodeKind::OpaqueType);
      advance();
      advance();
      add_child(id, parse_type());
      return close(id);
    }
    eat("|");
    NodeId first = parse_intersection_type();
    if (!at("|")) return maybe_conditional(first, start);
    const NodeId id = open(NodeKind::UnionType, start);
    add_child(id, first);
    while (eat("|")) add_child(id, parse_intersection_type());
    return maybe_conditional(close(id), start);
  }

  NodeId maybe_conditional(NodeId check, std::uint32_t start) {
    if (!at("extends") || newline_before()) return check;
    const NodeId id = open(NodeKind::OpaqueType, start);
    add_child(id, check);
    advance();
    add_child(id, parse_intersection_type());
    if (eat("?")) {
      add_child(id, parse_type());
      expect(":");
      add_child(id, parse_type());
    }
    return close(id);
  }

  NodeId parse_intersection_type() {
    const std::uint32_t start = cur().span.start;
    eat("&");
    const NodeId first = parse_postfix_type();
    if (!at("&")) return first;
    const NodeId id = open(NodeKind::OpaqueType, start);
    add_child(id, first);
    while (eat("&")) add_child(id, parse_postfix_type());
    return close(id);
  }

  NodeId parse_postfix_type() {
    const std::uint32_t start = cur().span.start;
    NodeId t = parse_type_primary();
    while (at("[") && !newline_before()) {
      const NodeId id = open(NodeKind::OpaqueType, start);
      add_child(id, t);
      advance();
      if (!at("]")) add_child(id, parse_type());
      expect("]");
      t = close(id);
    }
    return t;
  }

  bool paren_starts_function_type() {
    // Scan the balanced group and look for `=>` right after it.
    int depth = 0;
    for (std::size_t i = 0;; ++i) {
      const Token& t = peek(i).token;
      if (t.kind == TokenKind::End) return false;
      const std::string_view s = text_of(t);
      if (t.kind == TokenKind::Punct && (s == "(" || s == "[" || s == "{")) ++depth;
      if (t.kind == TokenKind::Punct && (s == ")" || s == "]" || s == "}")) {
        if (--depth == 0) return text_of(peek(i + 1).token) == "=>";
      }
      if (i > 4096) return false;
    }
  }

  NodeId parse_type_primary() {
    const Token t = cur();
    const std::string_view s = text_of(t);
    if (t.kind == TokenKind::String) {
      const NodeId id = open(NodeKind::LiteralType);
      at_node(id).value = parse_string_value();
      at_node(id).flags |= flags::kStringKey;
      return close(id);
    }
    if (t.kind == TokenKind::Number || (s == "-" && peek(1).token.kind == TokenKind::Number)) {
      const NodeId id = open(NodeKind::LiteralType);
      if (s == "-") advance();
      at_node(id).value = std::string(cur_text());
      advance();
      return close(id);
    }
    if (t.kind == TokenKind::Template) {
      const NodeId id = open(NodeKind::OpaqueType);
      advance();
      return close(id);
    }
    if (s == "{") {
      // mapped types degrade to an opaque member inside the object type
      const NodeId id = open(NodeKind::ObjectType);
      parse_type_members(id);
      return close(id);
    }
    if (s == "[") {
      const NodeId id = open(NodeKind::OpaqueType);
      advance();
      while (!at_end() && !at("]")) {
        const std::uint32_t before = cur().span.start;
        eat("...");
        if (at_ident() && (at_ahead(1, ":") || (at_ahead(1, "?") && at_ahead(2, ":")))) {
          advance();
          eat("?");
          advance();
        }
        add_child(id, parse_type());
        eat("?");
        if (!eat(",")) break;
        if (cur().span.start == before) break;
      }
      expect("]");
      return close(id);
    }
    if (s == "(") {
      if (paren_starts_function_type()) {
        const NodeId id = open(NodeKind::OpaqueType);
        skip_group();
        expect("=>");
        add_child(id, parse_type(true));
        return close(id);
      }
      advance();
      const NodeId inner = parse_type();
      expect(")");
      return inner;
    }
    if (s == "<") {
      const NodeId id = open(NodeKind::OpaqueType);
      skip_group();
      if (at("(")) skip_group();
      expect("=>");
      add_child(id, parse_type(true));
      return close(id);
    }
    if (t.kind == TokenKind::Identifier) {
      if (s == "new" || (s == "abstract" && at_ahead(1, "new"))) {
        const NodeId id = open(NodeKind::OpaqueType);
        eat("abstract");
        advance();
        if (at("<")) skip_group();
        if (at("(")) skip_group();
        expect("=>");
        add_child(id, parse_type());
        return close(id);
      }
      if (s == "typeof") {
        const NodeId id = open(NodeKind::OpaqueType);
        advance();
        if (at("import")) {
          advance();
          if (at("(")) skip_group();
        } else if (at_ident()) {
          advance();
        }
        while (at(".") && peek(1).token.kind == TokenKind::Identifier) {
          advance();
          advance();
        }
        if (at("<") && !newline_before()) skip_group();
        return close(id);
      }
      if (s == "keyof" || s == "unique" || s == "readonly" || s == "infer" || s == "asserts") {
        const NodeId id = open(NodeKind::OpaqueType);
        advance();
        add_child(id, parse_postfix_type());
        if (s == "infer" && at("extends") && !at_ahead(1, "?")) {
          advance();
          add_child(id, parse_postfix_type());
        }
        return close(id);
      }
      static constexpr std::string_view kKeywords[] = {
          "string", "number", "boolean", "any", "unknown", "never", "void", "object",
          "symbol", "bigint", "undefined", "null", "true", "false", "this"};
      if (std::find(std::begin(kKeywords), std::end(kKeywords), s) != std::end(kKeywords) &&
          !at_ahead(1, ".")) {
        const NodeId id = open(s == "true" || s == "false" ? NodeKind::LiteralType : NodeKind::KeywordType);
        at_node(id).name = std::string(s);
        at_node(id).value = std::string(s);
        advance();
        return close(id);
      }
      const NodeId id = open(NodeKind::TypeReference);
      std::string name(s);
      advance();
      while (at(".") && peek(1).token.kind == TokenKind::Identifier) {
        advance();
        name += '.';
        name += cur_text();
        advance();
      }
      at_node(id).name = std::move(name);
      if (at("<") && !newline_before()) {
        advance();
        while (!at_end() && !at(">")) {
          const std::uint32_t before = cur().span.start;
          add_child(id, parse_type());
          if (!eat(",")) break;
          if (cur().span.start == before) break;
        }
        expect(">");
      }
      return close(id);
    }
    const NodeId id = open(NodeKind::OpaqueType);
    diag(t.span.start, t.span.end, "expected type");
    return close(id);
  }

  // ------------------------------------------------------------ expressions

  NodeId parse_expression() {
    const std::uint32_t start = cur().span.start;
    NodeId e = parse_assignment();
    if (!at(",")) return e;
    const NodeId id = open(NodeKind::Binary, start);
    at_node(id).value = ",";
    add_child(id, e);
    while (eat(",")) add_child(id, parse_assignment());
    return close(id);
  }

  bool looks_like_arrow_after_paren() {
    int depth = 0;
    for (std::size_t i = 0;; ++i) {
      const Token& t = peek(i).token;
      if (t.kind == TokenKind::End) return false;
      const std::string_view s = text_of(t);
      if (t.kind == TokenKind::Punct && (s == "(" || s == "[" || s == "{")) ++depth;
      if (t.kind == TokenKind::Punct && (s == ")" || s == "]" || s == "}")) {
        if (--depth == 0) {
          const Lexed& nx = peek(i + 1);
          const std::string_view ns = text_of(nx.token);
          if (ns == "=>" && !nx.newline_before) return true;
          return ns == ":";
        }
      }
      if (i > 4096) return false;
    }
  }

  NodeId try_arrow() {
    // cur is '(' or '<'; returns kNoNode (and restores) when not an arrow.
    const Checkpoint cp = save();
    const NodeId id = open(NodeKind::ArrowFunction);
    if (at("<")) skip_group();
    if (!at("(")) {
      restore(cp);
      return kNoNode;
    }
    parse_params(id);
    if (at(":")) {
      advance();
      at_node(id).type = parse_type(true);
    }
    if (!at("=>") || newline_before() || diags_.size() != cp.diags) {
      restore(cp);
      return kNoNode;
    }
    advance();
    parse_arrow_body(id);
    return close(id);
  }

  void parse_arrow_body(NodeId id) {
    if (at("{")) add_child(id, parse_block());
    else add_child(id, parse_assignment());
    at_node(id).flags |= flags::kHasBody;
  }

  NodeId parse_assignment() {
    const std::uint32_t start = cur().span.start;
    if (at("async") && !peek(1).newline_before) {
      if (peek(1).token.kind == TokenKind::Identifier && at_ahead(2, "=>") && !at_ahead(1, "function")) {
        const NodeId id = open(NodeKind::ArrowFunction);
        at_node(id).flags |= flags::kAsync;
        advance();
        single_param_arrow(id);
        return close(id);
      }
      if (at_ahead(1, "(") || at_ahead(1, "<")) {
        const Checkpoint cp = save();
        advance();
        const NodeId arrow = try_arrow();
        if (arrow != kNoNode) {
          at_node(arrow).flags |= flags::kAsync;
          at_node(arrow).span = span(start, at_node(arrow).span.end);
          return arrow;
        }
        restore(cp);
      }
    }
    if (at_ident() && !is_keyword(cur_text()) && at_ahead(1, "=>") && !peek(1).newline_before) {
      const NodeId id = open(NodeKind::ArrowFunction);
      single_param_arrow(id);
      return close(id);
    }
    if ((at("(") && looks_like_arrow_after_paren()) || (at("<") && !jsx_)) {
      const NodeId arrow = try_arrow();
      if (arrow != kNoNode) return arrow;
    }
    const NodeId lhs = parse_conditional();
    if (cur().kind == TokenKind::Punct) {
      std::string_view op = cur_text();
      if (op == ">") op = greater_op_at();
      if (is_assignment_op(op)) {
        const NodeId id = open(NodeKind::Assignment, start);
        at_node(id).value = std::string(op);
        add_child(id, lhs);
        consume_glued(op);
        add_child(id, parse_assignment());
        return close(id);
      }
    }
    return lhs;
  }

  void single_param_arrow(NodeId id) {
    const NodeId p = open(NodeKind::Parameter);
    const NodeId b = open(NodeKind::Identifier);
    at_node(b).name = std::string(cur_text());
    at_node(p).name = at_node(b).name;
    advance();
    add_child(p, close(b));
    add_child(id, close(p));
    expect("=>");
    parse_arrow_body(id);
  }

  NodeId parse_conditional() {
    const std::uint32_t start = cur().span.start;
    const NodeId test = parse_binary(0);
    if (!at("?")) return test;
    const NodeId id = open(NodeKind::Conditional, start);
    add_child(id, test);
    advance();
    add_child(id, parse_assignment());
    expect(":");
    add_child(id, parse_assignment());
    return close(id);
  }

  std::string_view binary_op_at() {
    const Token& t = cur();
    if (t.kind == TokenKind::Punct) {
      if (text_of(t) == ">") {
        const std::string_view op = greater_op_at();
        return is_assignment_op(op) ? std::string_view{} : op;
      }
      return text_of(t);
    }
    if (t.kind == TokenKind::Identifier) {
      const std::string_view s = text_of(t);
      if (s == "instanceof" || s == "in") return s;
      if ((s == "as" || s == "satisfies") && !newline_before()) return s;
    }
    return {};
  }

  NodeId parse_binary(int min_prec) {
    const std::uint32_t start = cur().span.start;
    NodeId left = parse_unary();
    for (;;) {
      const std::string_view op = binary_op_at();
      const int prec = op.empty() ? -1 : binary_precedence(op);
      if (prec < 0 || prec < min_prec) return left;
      if (op == "as" || op == "satisfies") {
        const NodeId id = open(op == "as" ? NodeKind::As : NodeKind::Satisfies, start);
        add_child(id, left);
        advance();
        if (op == "as" && at("const")) {
          const NodeId t = open(NodeKind::KeywordType);
          at_node(t).name = "const";
          advance();
          at_node(id).type = close(t);
        } else {
          at_node(id).type = parse_type();
        }
        left = close(id);
        continue;
      }
      const std::string op_text(op);
      const NodeId id = open(NodeKind::Binary, start);
      at_node(id).value = op_text;
      add_child(id, left);
      consume_glued(op);
      const int next_min = op_text == "**" ? prec : prec + 1;
      add_child(id, parse_binary(next_min));
      left = close(id);
    }
  }

  NodeId parse_unary() {
    const Token& t = cur();
    const std::string_view s = text_of(t);
    const bool prefix_punct = t.kind == TokenKind::Punct &&
                              (s == "!" || s == "-" || s == "+" || s == "~" || s == "++" || s == "--");
    const bool prefix_word = t.kind == TokenKind::Identifier &&
                             (s == "typeof" || s == "void" || s == "delete" || s == "await") &&
                             !at_ahead(1, ")") && !at_ahead(1, ";") && !at_ahead(1, ",") &&
                             !at_ahead(1, "=") && !at_ahead(1, ".") && !at_ahead(1, "}");
    if (prefix_punct || prefix_word) {
      const NodeId id = open(NodeKind::Unary);
      at_node(id).value = std::string(s);
      advance();
      add_child(id, parse_unary());
      return close(id);
    }
    if (s == "<" && t.kind == TokenKind::Punct && !jsx_) {
      // <T>expr type assertion
      const NodeId id = open(NodeKind::As);
      advance();
      at_node(id).type = parse_type();
      expect(">");
      add_child(id, parse_unary());
      return close(id);
    }
    const std::uint32_t start = t.span.start;
    NodeId e = parse_call_member();
    if ((at("++") || at("--")) && !newline_before()) {
      const NodeId id = open(NodeKind::Unary, start);
      at_node(id).value = std::string(cur_text());
      at_node(id).flags |= flags::kPostfix;
      add_child(id, e);
      advance();
      e = close(id);
    }
    return e;
  }

  void parse_arguments(NodeId call) {
    advance();  // (
    while (!at_end() && !at(")")) {
      if (at("...")) {
        const NodeId sp = open(NodeKind::Spread);
        advance();
        add_child(sp, parse_assignment());
        add_child(call, close(sp));
      } else {
        add_child(call, parse_assignment());
      }
      if (!at(",") && !at(")")) {
        diag(cur().span.start, cur().span.end, "expected ',' or ')'");
        recover_in_list(")");
      }
      if (!eat(",")) break;
    }
    expect(")");
  }

  NodeId parse_call_member() {
    const std::uint32_t start = cur().span.start;
    NodeId e;
    if (at("new") && !at_ahead(1, ".")) {
      const NodeId id = open(NodeKind::New);
      advance();
      // callee: member chain without calls
      NodeId callee = parse_primary();
      while (at(".") || at("[")) {
        if (eat(".")) {
          const NodeId m = open(NodeKind::MemberAccess, start);
          at_node(m).name = std::string(cur_text());
          if (at_ident()) advance();
          add_child(m, callee);
          callee = close(m);
        } else {
          const NodeId m = open(NodeKind::ElementAccess, start);
          add_child(m, callee);
          advance();
          add_child(m, parse_expression());
          expect("]");
          callee = close(m);
        }
      }
      add_child(id, callee);
      if (at("<")) {
        const Checkpoint cp = save();
        skip_group();
        if (!at("(")) restore(cp);
      }
      if (at("(")) parse_arguments(id);
      e = close(id);
    } else {
      e = parse_primary();
    }
    for (;;) {
      if (at(".") || at("?.")) {
        const bool optional = at("?.");
        advance();
        if (optional && at("(")) {
          const NodeId c = open(NodeKind::Call, start);
          at_node(c).flags |= flags::kOptional;
          add_child(c, e);
          parse_arguments(c);
          e = close(c);
          continue;
        }
        if (optional && at("[")) {
          const NodeId m = open(NodeKind::ElementAccess, start);
          at_node(m).flags |= flags::kOptional;
          add_child(m, e);
          advance();
          add_child(m, parse_expression());
          expect("]");
          e = close(m);
          continue;
        }
        const NodeId m = open(NodeKind::MemberAccess, start);
        if (optional) at_node(m).flags |= flags::kOptional;
        add_child(m, e);
        if (at_ident()) {
          at_node(m).name = std::string(cur_text());
          advance();
        } else {
          diag(cur().span.start, cur().span.end, "expected property name");
        }
        e = close(m);
      } else if (at("[")) {
        const NodeId m = open(NodeKind::ElementAccess, start);
        add_child(m, e);
        advance();
        add_child(m, parse_expression());
        expect("]");
        e = close(m);
      } else if (at("(")) {
        const NodeId c = open(NodeKind::Call, start);
        add_child(c, e);
        parse_arguments(c);
        e = close(c);
      } else if (at("!") && !newline_before() && !at_ahead(1, "=")) {
        const NodeId n = open(NodeKind::NonNull, start);
        add_child(n, e);
        advance();
        e = close(n);
      } else if (cur().kind == TokenKind::Template && !newline_before()) {
        const NodeId c = open(NodeKind::Call, start);
        add_child(c, e);
        const NodeId tl = open(NodeKind::TemplateLiteral);
        advance();
        add_child(c, close(tl));
        e = close(c);
      } else if (at("<") && !newline_before() && looks_like_type_args_call()) {
        skip_group();
      } else {
        return e;
      }
    }
  }

  bool looks_like_type_args_call() {
    // f<T>(x): a balanced <...> immediately followed by '('.
    int depth = 0;
    for (std::size_t i = 0; i < 64; ++i) {
      const Token& t = peek(i).token;
      const std::string_view s = text_of(t);
      if (t.kind == TokenKind::End || s == ";" || s == "{" || s == "}" || s == "&&" || s == "||")
        return false;
      if (s == "<") ++depth;
      if (s == ">" && --depth == 0) return text_of(peek(i + 1).token) == "(";
    }
    return false;
  }

  NodeId parse_primary() {
    const Token t = cur();
    const std::string_view s = text_of(t);
    switch (t.kind) {
      case TokenKind::String: {
        const NodeId id = open(NodeKind::StringLiteral);
        at_node(id).value = parse_string_value();
        return close(id);
      }
      case TokenKind::Number: {
        const NodeId id = open(NodeKind::NumberLiteral);
        at_node(id).value = std::string(s);
        advance();
        return close(id);
      }
      case TokenKind::Template: {
        const NodeId id = open(NodeKind::TemplateLiteral);
        at_node(id).value = std::string(s);
        advance();
        return close(id);
      }
      case TokenKind::Identifier: {
        if (s == "function") return parse_function(NodeKind::FunctionExpression, 0);
        if (s == "async" && at_ahead(1, "function")) {
          advance();
          const NodeId fn = parse_function(NodeKind::FunctionExpression, flags::kAsync);
          at_node(fn).span = span(t.span.start, at_node(fn).span.end);
          return fn;
        }
        if (s == "class") {
          const NodeId id = open(NodeKind::OpaqueExpression);
          diag(t.span.start, t.span.end, "unsupported construct 'class'");
          advance();
          while (!at_end() && !at("{")) advance();
          if (at("{")) skip_group();
          return close(id);
        }
        if (is_keyword(s) && s != "this" && s != "null" && s != "true" && s != "false" &&
            s != "super" && s != "import" && s != "new") {
          const NodeId id = open(NodeKind::OpaqueExpression);
          diag(t.span.start, t.span.end, "expected expression");
          return close(id);
        }
        const NodeId id = open(NodeKind::Identifier);
        at_node(id).name = std::string(s);
        advance();
        return close(id);
      }
      case TokenKind::Punct: {
        if (s == "(") {
          const NodeId id = open(NodeKind::Parenthesized);
          advance();
          add_child(id, parse_expression());
          expect(")");
          return close(id);
        }
        if (s == "[") {
          const NodeId id = open(NodeKind::ArrayLiteral);
          advance();
          while (!at_end() && !at("]")) {
            if (at(",")) {
              advance();
              continue;
            }
            if (at("...")) {
              const NodeId sp = open(NodeKind::Spread);
              advance();
              add_child(sp, parse_assignment());
              add_child(id, close(sp));
            } else {
              add_child(id, parse_assignment());
            }
            if (!at(",") && !at("]")) {
              diag(cur().span.start, cur().span.end, "expected ',' or ']'");
              recover_in_list("]");
            }
            if (!eat(",")) break;
          }
          expect("]");
          return close(id);
        }
        if (s == "{") return parse_object_literal();
        if (s == "/" || s == "/=") {
          const NodeId id = open(NodeKind::RegexLiteral);
          consume_special(TokenKind::Regex, lex_.scan_regex(t.span.start));
          return close(id);
        }
        if (s == "<" && jsx_) return parse_jsx();
        break;
      }
      default:
        break;
    }
    const NodeId id = open(NodeKind::OpaqueExpression);
    diag(t.span.start, t.span.end, "expected expression");
    return close(id);
  }

  NodeId parse_object_literal() {
    const NodeId id = open(NodeKind::ObjectLiteral);
    advance();
    while (!at_end() && !at("}")) {
      if (at(",")) {
        advance();
        continue;
      }
      const std::uint32_t before = cur().span.start;
      add_child(id, parse_object_member());
      if (!at(",") && !at("}")) {
        diag(cur().span.start, cur().span.end, "expected ',' or '}'");
        recover_in_list("}");
        if (cur().span.start == before) advance();
      }
      if (!eat(",")) break;
    }
    expect("}");
    return close(id);
  }

  NodeId parse_object_member() {
    if (at("...")) {
      const NodeId sp = open(NodeKind::Spread);
      advance();
      if (at("}") || at(",")) diag(prev_end_, prev_end_, "spread without operand");
      else add_child(sp, parse_assignment());
      return close(sp);
    }
    const NodeId id = open(NodeKind::Property);
    std::uint32_t fn_flags = 0;
    // get/set/async modifiers before a method name
    while ((at("get") || at("set") || at("async") || at("*")) &&
           !(at_ahead(1, ":") || at_ahead(1, "(") || at_ahead(1, ",") || at_ahead(1, "}"))) {
      if (at("async")) fn_flags |= flags::kAsync;
      advance();
    }
    if (at("[")) {
      at_node(id).flags |= flags::kComputed;
      advance();
      add_child(id, parse_assignment());
      expect("]");
    } else if (cur().kind == TokenKind::String) {
      at_node(id).flags |= flags::kStringKey;
      at_node(id).name = parse_string_value();
    } else if (at_ident() || cur().kind == TokenKind::Number) {
      at_node(id).name = std::string(cur_text());
      advance();
    } else {
      diag(cur().span.start, cur().span.end, "expected property");
      return close(id);
    }
    if (at("(") || at("<")) {
      const NodeId fn = open(NodeKind::FunctionExpression, at_node(id).span.start);
      at_node(fn).flags |= fn_flags;
      at_node(fn).name = at_node(id).name;
      if (at("<")) skip_group();
      parse_params(fn);
      if (eat(":")) at_node(fn).type = parse_type(true);
      if (at("{")) {
        add_child(fn, parse_block());
        at_node(fn).flags |= flags::kHasBody;
      }
      add_child(id, close(fn));
      return close(id);
    }
    if (eat(":")) {
      add_child(id, parse_assignment());
      return close(id);
    }
    at_node(id).kind = NodeKind::ShorthandProperty;
    if (eat("=")) add_child(id, parse_assignment());
    return close(id);
  }

  // ------------------------------------------------------------------ JSX

  static bool jsx_name_char(char c) {
    return Lexer::is_ident_part(static_cast<unsigned char>(c)) || c == '.' || c == ':' || c == '-';
  }

  std::uint32_t skip_ws(std::uint32_t p) const {
    while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t' || src_[p] == '\n' || src_[p] == '\r'))
      ++p;
    return p;
  }

  /// Braced JSX expression container; nested JSX inside is skipped whole.
  std::uint32_t jsx_skip_braced(std::uint32_t p, bool& ok) const {
    const auto n = static_cast<std::uint32_t>(src_.size());
    int depth = 0;
    char prev_sig = '{';
    ok = false;
    while (p < n) {
      const char c = src_[p];
      if (c == '{') {
        ++depth;
        ++p;
      } else if (c == '}') {
        ++p;
        if (--depth == 0) {
          ok = true;
          return p;
        }
      } else if (c == '\'' || c == '"' || c == '`') {
        bool closed = false;
        if (c == '`') {
          p = lex_.scan_template(p, closed);
        } else {
          std::uint32_t q = p + 1;
          while (q < n && src_[q] != c && src_[q] != '\n') q += src_[q] == '\\' ? 2 : 1;
          p = std::min(q + 1, n);
        }
      } else if (src_.substr(p, 2) == "//") {
        while (p < n && src_[p] != '\n') ++p;
      } else if (src_.substr(p, 2) == "/*") {
        const auto close = src_.find("*/", p + 2);
        p = close == std::string_view::npos ? n : static_cast<std::uint32_t>(close + 2);
      } else if (c == '<' && p + 1 < n &&
                 (Lexer::is_ident_start(static_cast<unsigned char>(src_[p + 1])) || src_[p + 1] == '>') &&
                 std::string_view("(,=?:&|{[>").find(prev_sig) != std::string_view::npos) {
        JsxScan inner;
        scan_jsx_element(p, inner, false);
        if (!inner.ok) return inner.end;
        p = inner.end;
        prev_sig = '>';
        continue;
      } else {
        ++p;
      }
      if (c != ' ' && c != '\t' && c != '\n' && c != '\r') prev_sig = c;
    }
    return p;
  }

  void scan_jsx_element(std::uint32_t p, JsxScan& out, bool root) const {
    const auto n = static_cast<std::uint32_t>(src_.size());
    out.ok = false;
    ++p;  // <
    std::uint32_t name_start = p;
    while (p < n && jsx_name_char(src_[p])) ++p;
    if (root) out.tag = std::string(src_.substr(name_start, p - name_start));
    const bool fragment = p == name_start;
    // attributes
    while (!fragment) {
      p = skip_ws(p);
      if (p >= n) {
        out.end = n;
        return;
      }
      if (src_.substr(p, 2) == "/>") {
        out.end = p + 2;
        out.ok = true;
        return;
      }
      if (src_[p] == '>') break;
      if (src_[p] == '{') {
        bool ok = false;
        p = jsx_skip_braced(p, ok);
        if (!ok) {
          out.end = p;
          return;
        }
        continue;
      }
      const std::uint32_t an = p;
      while (p < n && jsx_name_char(src_[p])) ++p;
      if (p == an) {
        out.end = p;
        return;
      }
      JsxScan::Attr attr;
      attr.name = std::string(src_.substr(an, p - an));
      attr.name_span = span(an, p);
      p = skip_ws(p);
      if (p < n && src_[p] == '=') {
        p = skip_ws(p + 1);
        if (p < n && (src_[p] == '"' || src_[p] == '\'')) {
          const char q = src_[p];
          const std::uint32_t vs = p;
          ++p;
          while (p < n && src_[p] != q) ++p;
          if (p >= n) {
            out.end = n;
            return;
          }
          ++p;
          attr.value_span = span(vs, p);
          attr.string_value = true;
        } else if (p < n && src_[p] == '{') {
          const std::uint32_t vs = p;
          bool ok = false;
          p = jsx_skip_braced(p, ok);
          if (!ok) {
            out.end = p;
            return;
          }
          attr.value_span = span(vs, p);
        } else if (p < n && src_[p] == '<') {
          const std::uint32_t vs = p;
          JsxScan inner;
          scan_jsx_element(p, inner, false);
          if (!inner.ok) {
            out.end = inner.end;
            return;
          }
          p = inner.end;
          attr.value_span = span(vs, p);
        }
      }
      if (root) out.attrs.push_back(std::move(attr));
    }
    ++p;  // >
    // children
    std::uint32_t text_start = p;
    auto flush_text = [&](std::uint32_t end) {
      if (!root) return;
      std::uint32_t a = text_start, b = end;
      while (a < b && (src_[a] == ' ' || src_[a] == '\n' || src_[a] == '\t' || src_[a] == '\r')) ++a;
      while (b > a && (src_[b - 1] == ' ' || src_[b - 1] == '\n' || src_[b - 1] == '\t' || src_[b - 1] == '\r')) --b;
      if (a < b) out.texts.push_back(span(a, b));
    };
    while (p < n) {
      if (src_.substr(p, 2) == "</") {
        flush_text(p);
        while (p < n && src_[p] != '>') ++p;
        if (p >= n) {
          out.end = n;
          return;
        }
        out.end = p + 1;
        out.ok = true;
        return;
      }
      if (src_[p] == '<') {
        flush_text(p);
        JsxScan inner;
        scan_jsx_element(p, inner, false);
        if (!inner.ok) {
          out.end = inner.end;
          return;
        }
        p = text_start = inner.end;
        continue;
      }
      if (src_[p] == '{') {
        flush_text(p);
        bool ok = false;
        p = jsx_skip_braced(p, ok);
        if (!ok) {
          out.end = p;
          return;
        }
        text_start = p;
        continue;
      }
      ++p;
    }
    out.end = n;
  }

  NodeId parse_jsx() {
    const std::uint32_t start = cur().span.start;
    JsxScan scan;
    scan_jsx_element(start, scan, true);
    const NodeId id = open(NodeKind::Jsx, start);
    at_node(id).name = scan.tag;
    if (!scan.ok) diag(start, scan.end, "unterminated JSX element");
    for (const auto& a : scan.attrs) {
      const NodeId attr = open(NodeKind::JsxAttribute, a.name_span.start);
      at_node(attr).name = a.name;
      std::uint32_t attr_end = a.name_span.end;
      if (a.value_span.end > a.value_span.start) {
        const NodeId v = open(a.string_value ? NodeKind::StringLiteral : NodeKind::OpaqueExpression,
                              a.value_span.start);
        at_node(v).span = a.value_span;
        if (a.string_value)
          at_node(v).value = std::string(src_.substr(a.value_span.start + 1, a.value_span.size() - 2));
        add_child(attr, v);
        attr_end = a.value_span.end;
      }
      at_node(attr).span = span(a.name_span.start, attr_end);
      add_child(id, attr);
    }
    for (const Span& t : scan.texts) {
      const NodeId txt = open(NodeKind::JsxText, t.start);
      at_node(txt).span = t;
      at_node(txt).value = std::string(src_.substr(t.start, t.size()));
      add_child(id, txt);
    }
    if (!scan.tag.empty() && src_.substr(scan.end >= 2 ? scan.end - 2 : 0, 2) == "/>")
      at_node(id).flags |= flags::kSelfClosing;
    consume_special(TokenKind::Jsx, scan.end);
    at_node(id).span = span(start, scan.end);
    return id;
  }

  std::string path_;
  std::string_view src_;
  Lexer lex_;
  bool jsx_;
  std::deque<Lexed> ahead_;
  std::vector<Node> nodes_;
  std::vector<Token> log_;
  std::vector<Diagnostic> diags_;
  std::vector<std::uint32_t> line_starts_;
  std::uint32_t prev_end_ = 0;
  mutable std::uint32_t col_cache_line_ = 0;
  mutable std::uint32_t col_cache_off_ = 0;
  mutable std::uint32_t col_cache_col_ = 1;
};

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

ParseResult parse_file(std::string path, std::string source, const ParseOptions& options) {
  if (source.size() > options.max_bytes)
    throw Error(ErrorCode::InputTooLarge, path + " exceeds " + std::to_string(options.max_bytes) + " bytes");
  if (!is_valid_utf8(source)) throw Error(ErrorCode::InvalidEncoding, path + " is not valid UTF-8");
  const bool jsx = options.jsx >= 0 ? options.jsx != 0 : (ends_with(path, ".tsx") || ends_with(path, ".jsx"));
  const std::string_view view = source;
  Parser parser(path, view, jsx);
  // The parser only holds views into `source`; moving the string keeps its
  // heap buffer, but small strings live inline, so copy before handing off.
  std::string owned(view);
  return parser.run(std::move(owned));
}

}  // namespace vibeguard::syntax
