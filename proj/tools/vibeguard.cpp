// vibeguard command-line entry point.
//
//   scan       list detected scopes
//   propose    record proposals in .vibeguard/specs.json
//   verify     check accepted and soft specs
//   fix        show (or apply) the edit plan for a failing spec
//   hook       agent hook: HookEvent JSON on stdin, FeedbackReport on stdout
//   watch      re-run the hook pipeline on every change burst
//   serve      HTTP API for the review panel
//   status     store summary
//   decide     accept / reject / soften a spec
//   typecheck  run the configured compiler oracle

#include <csignal>
#include <iostream>
#include <iterator>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vibeguard/detect.hpp"
#include "vibeguard/fix.hpp"
#include "vibeguard/index.hpp"
#include "vibeguard/sidecar.hpp"
#include "vibeguard/store.hpp"
#include "vibeguard/verify.hpp"

namespace fs = std::filesystem;
using namespace vibeguard;
using nlohmann::json;

namespace {

struct Globals {
  std::string workspace = ".";
  std::string config;
};

sidecar::Config load_config(const Globals& g) {
  return sidecar::load_config(g.config.empty() ? fs::path(g.workspace) / sidecar::kConfigFile : fs::path(g.config));
}

index::CodebaseIndex index_workspace(const Globals& g, const sidecar::Config& c) {
  index::IndexOptions opts;
  opts.family_min_size = c.family_min_size;
  opts.family_min_sites = c.family_min_sites;
  return index::build_index(index::read_source_tree(g.workspace), opts);
}

fs::path store_path(const Globals& g) { return fs::path(g.workspace) / store::kStoreFile; }

std::string where(const index::CodebaseIndex& idx, const std::string& path, std::uint32_t offset) {
  std::uint32_t line = 1, col = 1;
  if (const auto* ast = idx.ast(path); ast && offset <= ast->text().size()) {
    auto s = ast->make_span(offset, offset);
    line = s.line;
    col = s.col;
  }
  return path + ":" + std::to_string(line) + ":" + std::to_string(col);
}

std::string joined(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : ", ") + x;
  return out;
}

json scope_json(const index::CodebaseIndex& idx, const detect::Scope& s) {
  json j = {{"kind", to_string(s.kind)},
            {"path", s.anchor.path},
            {"decl", s.anchor.decl},
            {"locator", s.anchor.locator},
            {"location", where(idx, s.anchor.path, s.anchor.start)}};
  if (const auto* sw = std::get_if<index::SwitchSite>(&s.payload)) {
    const auto* u = idx.find_union(*sw->resolved_union);
    j["union"] = sw->resolved_union->name;
    j["missing"] = detect::missing_members(u->members, sw->cases);
  } else if (const auto* c = std::get_if<index::ComparisonChain>(&s.payload)) {
    j["subject"] = c->subject;
    j["observed"] = c->observed_values;
  } else if (const auto* f = std::get_if<index::LiteralFamily>(&s.payload)) {
    j["literals"] = f->literals;
    j["sites"] = f->sites.size();
  } else if (const auto* m = std::get_if<index::MappingLiteral>(&s.payload)) {
    j["object"] = m->decl_name;
    j["key_union"] = m->intended_key_union->name;
  }
  return j;
}

int cmd_scan(const Globals& g, bool as_json) {
  const auto idx = index_workspace(g, load_config(g));
  const auto scopes = detect::detect_all(idx);
  json out = json::array();
  for (const auto& s : scopes) out.push_back(scope_json(idx, s));
  if (as_json) {
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  for (const auto& s : out) {
    std::cout << s["location"].get<std::string>() << "  " << s["kind"].get<std::string>() << "  "
              << s["decl"].get<std::string>() << "  " << s["locator"].get<std::string>();
    if (s.contains("missing")) std::cout << "  missing: " << joined(s["missing"]);
    if (s.contains("observed")) std::cout << "  observed: " << joined(s["observed"]);
    if (s.contains("literals")) std::cout << "  literals: " << joined(s["literals"]);
    if (s.contains("key_union")) std::cout << "  keys: " << s["key_union"].get<std::string>();
    std::cout << "\n";
  }
  std::cout << scopes.size() << " scope(s)\n";
  return 0;
}

int cmd_propose(const Globals& g) {
  const auto idx = index_workspace(g, load_config(g));
  auto proposal = detect::propose_specs(idx, detect::detect_all(idx));
  store::UpsertStats stats;
  auto st = store::upsert(store::load_or_empty(store_path(g)), proposal.records, &stats);
  store::persist(st, store_path(g));
  for (const auto& r : st.records()) {
    if (r.status != Status::Proposed) continue;
    std::cout << r.id << "  " << to_string(r.kind) << "  " << where(idx, r.anchor.path, r.anchor.start) << "\n  "
              << r.explanation << "\n";
  }
  std::cout << stats.inserted.size() << " new, " << stats.suppressed.size() << " suppressed (rejected before), "
            << stats.revived.size() << " revived\n";
  for (const auto& n : proposal.name_collisions) std::cout << "name collision: " << n << "\n";
  for (const auto& c : store::detect_conflicts(st))
    std::cout << "conflict (" << to_string(c.nature) << "): " << c.first << " / " << c.second << " on " << c.overlap
              << "\n";
  return 0;
}

int cmd_verify(const Globals& g, int budget_ms) {
  const auto config = load_config(g);
  const auto idx = index_workspace(g, config);
  const auto st = store::load_or_empty(store_path(g));
  const auto oracle = sidecar::make_oracle(config);
  verify::VerifyOptions o;
  o.budget = std::chrono::milliseconds(budget_ms >= 0 ? budget_ms : config.budget_ms);
  o.oracle = oracle.get();
  o.workspace = g.workspace;
  const auto rep = verify::verify_all(idx, st, o);
  for (const auto& v : rep.verdicts) {
    const auto* r = st.find(v.record_id);
    std::cout << v.record_id << "  " << verify::to_string(v.outcome) << "  (" << verify::to_string(v.tier) << ", "
              << to_string(r->status) << ")";
    if (!v.missing_members.empty()) std::cout << "  missing: " << joined(v.missing_members);
    std::cout << "\n";
    for (const auto& d : v.diagnostics)
      std::cout << "  " << d.path << ":" << d.span.line << ":" << d.span.col << " " << verify::to_string(d.severity)
                << ": " << d.message << "\n";
  }
  for (const auto& w : rep.warnings) std::cout << "warning: " << w << "\n";
  std::cout << rep.passed << " passed, " << rep.failed << " failed (" << rep.hard_failures << " hard), "
            << rep.not_applicable << " not applicable, " << rep.budget_exceeded << " over budget\n";
  return rep.hard_failures > 0 ? 2 : 0;
}

int cmd_fix(const Globals& g, const std::string& id, bool apply) {
  const auto config = load_config(g);
  const auto idx = index_workspace(g, config);
  const auto st = store::load_or_empty(store_path(g));
  const SpecRecord* r = st.find(id);
  if (!r) throw Error(ErrorCode::UnknownId, "no record " + id);
  auto verdict = verify::check_spec(idx, *r);
  if (verdict.outcome == verify::Outcome::Pass && verdict.needs_compile) {
    // Passing syntactically through the guard; ask the compiler.
    const auto oracle = sidecar::make_oracle(config);
    verify::VerifyOptions o;
    o.budget = std::chrono::milliseconds(config.budget_ms);
    o.oracle = oracle.get();
    o.workspace = g.workspace;
    for (const auto& v : verify::verify_all(idx, store::SpecStore({*r}), o).verdicts)
      if (v.record_id == id) verdict = v;
  }
  if (verdict.outcome != verify::Outcome::Fail) {
    std::cout << "record " << id << " is " << verify::to_string(verdict.outcome) << "; nothing to fix\n";
    return 0;
  }
  const auto plan = fix::plan_fix(idx, *r, verdict);
  std::cout << plan.summary << "\n";
  for (const auto& n : plan.review_notes) std::cout << "review: " << n << "\n";
  std::cout << fix::plan_diff(idx, plan);
  if (!apply) return 0;
  fix::DirectoryWorkspace ws(g.workspace);
  const auto result = fix::apply_fix(ws, idx, plan, st);
  std::cout << "applied to " << joined(result.touched) << "\n";
  return 0;
}

int cmd_hook(const Globals& g, bool auto_apply) {
  std::string input{std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  const auto event = sidecar::parse_hook_event(input);
  auto config = load_config(g);
  if (auto_apply) config.auto_apply = true;
  sidecar::Sidecar sc(g.workspace, config);
  const auto report = sc.handle(event);
  std::cout << sidecar::report_to_json(report).dump(2) << "\n";
  return report.exit_code;
}

// Blocks SIGINT/SIGTERM in every thread; a dedicated thread waits for them.
std::thread signal_waiter(std::function<void()> on_signal) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return std::thread([set, on_signal] {
    int sig = 0;
    sigwait(&set, &sig);
    on_signal();
  });
}

int cmd_watch(const Globals& g) {
  const auto config = load_config(g);
  sidecar::Sidecar sc(g.workspace, config);
  std::atomic<bool> stop{false};
  auto waiter = signal_waiter([&] { stop = true; });
  waiter.detach();
  sidecar::WatchOptions o;
  o.debounce = std::chrono::milliseconds(config.debounce_ms);
  o.on_log = [](const std::string& m) { std::cerr << "vibeguard: " << m << "\n"; };
  o.on_report = [](const sidecar::FeedbackReport& r) {
    std::cout << "snapshot " << r.snapshot << ": " << r.proposed.size() << " proposed, " << r.failures.size()
              << " failing, " << r.soft_warnings.size() << " soft, " << r.regressions.size() << " regressed\n"
              << std::flush;
  };
  auto first = sc.handle({sidecar::EventKind::Manual, {}, "watch"});
  o.on_report(first);
  sidecar::watch(sc, o, stop);
  return 0;
}

int cmd_serve(const Globals& g, const std::string& addr, const std::string& static_dir) {
  const auto config = load_config(g);
  sidecar::Sidecar sc(g.workspace, config);
  auto [host, port] = sidecar::parse_address(addr);
  sidecar::ServeOptions o;
  o.host = host;
  o.port = port;
  o.static_dir = static_dir;
  sidecar::Server server(sc, o);
  auto waiter = signal_waiter([&] { server.stop(); });
  waiter.detach();
  const int bound = server.bind();
  std::cerr << "vibeguard: serving " << host << ":" << bound << "\n";
  server.listen();
  return 0;
}

int cmd_status(const Globals& g) {
  const auto st = store::load_or_empty(store_path(g));
  const auto state = sidecar::load_state(g.workspace);
  std::map<std::string, int> by_status;
  for (const auto& r : st.records()) ++by_status[std::string(to_string(r.status))];
  std::cout << "workspace: " << fs::absolute(g.workspace).lexically_normal().string() << "\n"
            << "snapshot: " << state.snapshot_counter << "\n"
            << "records: " << st.size() << "\n";
  for (const auto& [s, n] : by_status) std::cout << "  " << s << ": " << n << "\n";
  for (const auto& r : st.records())
    std::cout << r.id << "  " << to_string(r.status) << "  " << to_string(r.kind) << "  " << r.anchor.path << "  "
              << r.anchor.locator << "\n";
  for (const auto& c : store::detect_conflicts(st))
    std::cout << "conflict (" << to_string(c.nature) << "): " << c.first << " / " << c.second << "\n";
  return 0;
}

int cmd_decide(const Globals& g, const std::string& id, const std::string& status, const std::string& actor) {
  const auto s = parse_status(status);
  if (!s) throw Error(ErrorCode::InvalidArgument, "unknown status " + status);
  auto st = store::set_status(store::load_or_empty(store_path(g)), id, *s, actor);
  store::persist(st, store_path(g));
  std::cout << id << " -> " << status << "\n";
  return 0;
}

int cmd_typecheck(const Globals& g, const std::string& oracle_override) {
  auto config = load_config(g);
  if (!oracle_override.empty()) config.oracle_cmd = oracle_override;
  const auto oracle = sidecar::make_oracle(config);
  if (!oracle) throw Error(ErrorCode::OracleUnavailable, "no oracle configured");
  const auto result = verify::compile_check(g.workspace, *oracle);
  for (const auto& d : result.diagnostics) std::cout << verify::format_diagnostic(d) << "\n";
  std::cout << oracle->name() << " exited " << result.exit_status << "\n";
  return result.exit_status == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detects, specifies, verifies and fixes latent union-handling bugs in TypeScript workspaces."};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--workspace", g.workspace, "Workspace root")->capture_default_str();
  app.add_option("--config", g.config, "Config file (default <workspace>/.vibeguard/config.json)");

  bool scan_json = false;
  auto* scan = app.add_subcommand("scan", "List detected scopes");
  scan->add_flag("--json", scan_json, "JSON output");

  auto* propose = app.add_subcommand("propose", "Record proposals in the spec store");

  int budget_ms = -1;
  auto* verify_cmd = app.add_subcommand("verify", "Check accepted and soft specs");
  verify_cmd->add_option("--budget-ms", budget_ms, "Verification budget in milliseconds");

  std::string fix_id;
  bool fix_apply = false;
  auto* fix_cmd = app.add_subcommand("fix", "Show the edit plan for a failing spec");
  fix_cmd->add_option("record-id", fix_id, "Record id")->required();
  fix_cmd->add_flag("--apply", fix_apply, "Apply the plan");

  bool hook_auto_apply = false;
  auto* hook = app.add_subcommand("hook", "Agent hook: HookEvent JSON on stdin, FeedbackReport JSON on stdout");
  hook->add_flag("--auto-apply", hook_auto_apply, "Apply fixes for accepted failing specs");

  auto* watch_cmd = app.add_subcommand("watch", "Re-run the pipeline on every change burst");

  std::string addr = "127.0.0.1:7173", static_dir;
  auto* serve = app.add_subcommand("serve", "HTTP API for the review panel");
  serve->add_option("--addr", addr, "HOST:PORT")->capture_default_str();
  serve->add_option("--static", static_dir, "Directory of panel assets served at /");

  auto* status = app.add_subcommand("status", "Store summary");

  std::string decide_id, decide_status, decide_by = "cli";
  auto* decide = app.add_subcommand("decide", "Set a spec's status");
  decide->add_option("record-id", decide_id)->required();
  decide->add_option("status", decide_status)
      ->required()
      ->check(CLI::IsMember({"accepted", "rejected", "soft", "retired"}));
  decide->add_option("--by", decide_by, "Who decided")->capture_default_str();

  std::string oracle_cmd;
  auto* typecheck = app.add_subcommand("typecheck", "Run the compiler oracle");
  typecheck->add_option("--oracle", oracle_cmd, "Command, or 'builtin'");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*scan) return cmd_scan(g, scan_json);
    if (*propose) return cmd_propose(g);
    if (*verify_cmd) return cmd_verify(g, budget_ms);
    if (*fix_cmd) return cmd_fix(g, fix_id, fix_apply);
    if (*hook) return cmd_hook(g, hook_auto_apply);
    if (*watch_cmd) return cmd_watch(g);
    if (*serve) return cmd_serve(g, addr, static_dir);
    if (*status) return cmd_status(g);
    if (*decide) return cmd_decide(g, decide_id, decide_status, decide_by);
    if (*typecheck) return cmd_typecheck(g, oracle_cmd);
  } catch (const fix::FixError& e) {
    std::cerr << "vibeguard: " << to_string(e.code()) << ": " << e.message() << "\n";
    for (const auto& id : e.records()) std::cerr << "  " << id << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "vibeguard: " << to_string(e.code()) << ": " << e.message() << "\n";
    return 1;
  }
  return 1;
}
