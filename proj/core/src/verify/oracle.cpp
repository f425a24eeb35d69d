#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <regex>
#include <set>

#include "vibeguard/error.hpp"
#include "vibeguard/verify.hpp"

namespace vibeguard::verify {

using index::CodebaseIndex;
using syntax::NodeId;
using syntax::NodeKind;
using syntax::SourceAst;

std::vector<OracleDiagnostic> parse_diagnostics(std::string_view output) {
  static const std::regex kLine(R"(^(.+?)\((\d+),(\d+)\): (error|warning) (TS\d+): (.*)$)");
  std::vector<OracleDiagnostic> out;
  std::size_t pos = 0;
  while (pos < output.size()) {
    auto nl = output.find('\n', pos);
    if (nl == std::string_view::npos) nl = output.size();
    std::string line(output.substr(pos, nl - pos));
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (std::regex_match(line, m, kLine)) {
      out.push_back({m[1].str(), static_cast<std::uint32_t>(std::stoul(m[2].str())),
                     static_cast<std::uint32_t>(std::stoul(m[3].str())), m[4].str(), m[5].str(), m[6].str()});
    } else if (!out.empty() && !line.empty() && (line[0] == ' ' || line[0] == '\t')) {
      auto first = line.find_first_not_of(" \t");
      out.back().message += " " + line.substr(first);
    }
  }
  return out;
}

std::string format_diagnostic(const OracleDiagnostic& d) {
  return d.file + "(" + std::to_string(d.line) + "," + std::to_string(d.col) + "): " + d.severity + " " + d.code +
         ": " + d.message;
}

// ---- CommandOracle ---------------------------------------------------------

CommandOracle::CommandOracle(std::string command, std::chrono::milliseconds timeout)
    : command_(std::move(command)), timeout_(timeout) {}

CompileResult CommandOracle::run(const std::filesystem::path& workspace) const {
  int fds[2];
  if (::pipe(fds) != 0) throw Error(ErrorCode::OracleUnavailable, "pipe failed");
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    throw Error(ErrorCode::OracleUnavailable, "fork failed");
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(fds[1], STDOUT_FILENO);
    ::dup2(fds[1], STDERR_FILENO);
    ::close(fds[0]);
    ::close(fds[1]);
    int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    if (::chdir(workspace.c_str()) != 0) ::_exit(126);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(fds[1]);

  CompileResult result;
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  char buf[4096];
  bool timed_out = false;
  for (;;) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    pollfd p{fds[0], POLLIN, 0};
    int rc = ::poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1000)));
    if (rc < 0 && errno == EINTR) continue;
    if (rc <= 0) continue;
    ssize_t n = ::read(fds[0], buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    result.output.append(buf, static_cast<std::size_t>(n));
  }
  ::close(fds[0]);
  if (timed_out) {
    ::kill(-pid, SIGKILL);
    ::waitpid(pid, nullptr, 0);
    throw Error(ErrorCode::OracleTimeout, "oracle '" + command_ + "' exceeded " + std::to_string(timeout_.count()) + " ms");
  }
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.exit_status = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  if (result.exit_status == 126 && !std::filesystem::is_directory(workspace))
    throw Error(ErrorCode::WorkspaceUnreadable, "cannot enter " + workspace.string());
  if (result.exit_status == 127)
    throw Error(ErrorCode::OracleUnavailable, "oracle command not found: " + command_);
  result.diagnostics = parse_diagnostics(result.output);
  return result;
}

// ---- MiniChecker -----------------------------------------------------------

namespace {

struct Emitter {
  CompileResult& out;
  void emit(const SourceAst& ast, std::uint32_t offset, std::string code, std::string message) {
    const auto span = ast.make_span(offset, offset);
    out.diagnostics.push_back({ast.path(), span.line, span.col, "error", std::move(code), std::move(message)});
  }
};

std::string literal_union(std::vector<std::string> values) {
  std::sort(values.begin(), values.end());
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? " | \"" : "\"") + values[i] + "\"";
  return out;
}

NodeId unwrap(const SourceAst& ast, NodeId id) {
  while (id != syntax::kNoNode && ast.node(id).kind == NodeKind::Parenthesized && !ast.node(id).children.empty())
    id = ast.node(id).children[0];
  return id;
}

// First non-trivia token at or after `offset`.
const syntax::Token* token_at(const SourceAst& ast, std::uint32_t offset) {
  for (const auto& t : ast.tokens())
    if (t.span.start >= offset && !t.is_trivia()) return &t;
  return nullptr;
}

void check_switches(const CodebaseIndex& idx, Emitter& em) {
  for (const auto& site : idx.switch_sites()) {
    if (!site.resolved_union || site.has_non_literal_case) continue;
    const auto* u = idx.find_union(*site.resolved_union);
    const auto* ast = idx.ast(site.file);
    if (!u || !ast) continue;
    const auto& sw = ast->node(site.node);
    for (std::size_t i = 1; i < sw.children.size(); ++i) {
      const auto& clause = ast->node(sw.children[i]);
      if (clause.kind == NodeKind::CaseClause && !clause.children.empty()) {
        const auto& test = ast->node(unwrap(*ast, clause.children[0]));
        if (test.kind == NodeKind::StringLiteral &&
            std::find(u->members.begin(), u->members.end(), test.value) == u->members.end())
          em.emit(*ast, test.span.start, "TS2678",
                  "Type '\"" + test.value + "\"' is not comparable to type '" + u->name + "'.");
      }
      if (clause.kind != NodeKind::DefaultClause) continue;
      std::vector<std::string> remaining;
      for (const auto& m : u->members)
        if (std::find(site.cases.begin(), site.cases.end(), m) == site.cases.end()) remaining.push_back(m);
      if (remaining.empty()) continue;
      syntax::walk(*ast, sw.children[i], [&](NodeId, const syntax::Node& n) {
        if (n.kind != NodeKind::Call || n.children.size() < 2) return true;
        const auto& callee = ast->node(n.children[0]);
        if (callee.kind != NodeKind::Identifier || callee.name != "assertNever") return true;
        if (syntax::member_path(*ast, n.children[1]) != site.discriminant) return true;
        em.emit(*ast, ast->node(n.children[1]).span.start, "TS2345",
                "Argument of type '" + literal_union(remaining) + "' is not assignable to parameter of type 'never'.");
        return false;
      });
    }
  }
}

void check_record_keys(const SourceAst& ast, const index::MappingLiteral& m, const index::UnionType& u,
                       std::uint32_t at, const std::string& target, Emitter& em) {
  std::vector<std::string> missing, extra;
  for (const auto& k : u.members)
    if (std::find(m.keys.begin(), m.keys.end(), k) == m.keys.end()) missing.push_back(k);
  for (const auto& k : m.keys)
    if (std::find(u.members.begin(), u.members.end(), k) == u.members.end()) extra.push_back(k);
  if (!extra.empty()) {
    std::uint32_t pos = at;
    for (auto c : ast.node(m.node).children) {
      const auto& prop = ast.node(c);
      if ((prop.kind == NodeKind::Property || prop.kind == NodeKind::ShorthandProperty) && prop.name == extra.front())
        pos = prop.span.start;
    }
    em.emit(ast, pos, "TS2353",
            "Object literal may only specify known properties, and '" + extra.front() + "' does not exist in type '" +
                target + "'.");
    return;
  }
  if (missing.empty()) return;
  std::string shape = "{ ";
  for (const auto& k : m.keys) shape += k + ": ...; ";
  shape += "}";
  std::sort(missing.begin(), missing.end());
  if (missing.size() == 1) {
    em.emit(ast, at, "TS2741",
            "Property '" + missing.front() + "' is missing in type '" + shape + "' but required in type '" + target + "'.");
  } else {
    std::string list;
    for (std::size_t i = 0; i < missing.size(); ++i) list += (i ? ", " : "") + missing[i];
    em.emit(ast, at, "TS2739", "Type '" + shape + "' is missing the following properties from type '" + target + "': " + list);
  }
}

void check_mappings(const CodebaseIndex& idx, Emitter& em) {
  for (const auto& m : idx.mapping_literals()) {
    const auto* ast = idx.ast(m.file);
    const auto* u = m.intended_key_union ? idx.find_union(*m.intended_key_union) : nullptr;
    if (!ast || !u) continue;
    syntax::walk(*ast, ast->root(), [&](NodeId, const syntax::Node& n) {
      if (n.kind == NodeKind::Declarator && m.explicit_annotation && n.type != syntax::kNoNode && n.children.size() > 1 &&
          n.span.start <= m.span.start && m.span.end <= n.span.end && n.name == m.decl_name) {
        check_record_keys(*ast, m, *u, n.span.start, std::string(ast->node_text(n.type)), em);
      }
      if (n.kind == NodeKind::Satisfies && m.has_satisfies_guard && !n.children.empty() &&
          unwrap(*ast, n.children[0]) == m.node && n.type != syntax::kNoNode) {
        const auto* kw = token_at(*ast, ast->node(n.children[0]).span.end);
        check_record_keys(*ast, m, *u, kw ? kw->span.start : n.span.start, std::string(ast->node_text(n.type)), em);
      }
      return true;
    });
  }
}

void check_names(const CodebaseIndex& idx, Emitter& em) {
  std::set<std::string> union_names;
  for (const auto& u : idx.unions()) union_names.insert(u.name);
  for (const auto& path : idx.paths()) {
    const auto* ast = idx.ast(path);
    if (!ast) continue;
    const auto names = idx.top_level_names(path);
    const std::set<std::string> declared(names.begin(), names.end());
    syntax::walk(*ast, ast->root(), [&](NodeId, const syntax::Node& n) {
      if (n.kind == NodeKind::Call && !n.children.empty()) {
        const auto& callee = ast->node(n.children[0]);
        if (callee.kind == NodeKind::Identifier && callee.name == "assertNever" && !declared.count("assertNever"))
          em.emit(*ast, callee.span.start, "TS2304", "Cannot find name 'assertNever'.");
      }
      if (n.kind == NodeKind::TypeReference && union_names.count(n.name) && !declared.count(n.name))
        em.emit(*ast, n.span.start, "TS2304", "Cannot find name '" + n.name + "'.");
      return true;
    });
  }
}

}  // namespace

CompileResult MiniChecker::check(const CodebaseIndex& idx) {
  CompileResult out;
  Emitter em{out};
  check_switches(idx, em);
  check_mappings(idx, em);
  check_names(idx, em);
  std::sort(out.diagnostics.begin(), out.diagnostics.end(), [](const auto& a, const auto& b) {
    return std::tie(a.file, a.line, a.col, a.code) < std::tie(b.file, b.line, b.col, b.code);
  });
  out.diagnostics.erase(std::unique(out.diagnostics.begin(), out.diagnostics.end()), out.diagnostics.end());
  for (const auto& d : out.diagnostics) out.output += format_diagnostic(d) + "\n";
  out.exit_status = out.diagnostics.empty() ? 0 : 1;
  return out;
}

CompileResult MiniChecker::run(const std::filesystem::path& workspace) const {
  return check(index::build_index(index::read_source_tree(workspace.string())));
}

}  // namespace vibeguard::verify
