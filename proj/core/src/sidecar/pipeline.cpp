#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <fstream>
#include <sstream>

#include "vibeguard/detect.hpp"
#include "vibeguard/sidecar.hpp"

namespace vibeguard::sidecar {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- config and events ----------------------------------------------------------

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidArgument, std::string("config field `") + key + "` has the wrong type");
  }
}

std::optional<std::string> slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return std::nullopt;
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

Config parse_config(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::InvalidArgument, "config is not a JSON object");
  Config c;
  read_field(j, "oracle_cmd", c.oracle_cmd);
  read_field(j, "oracle_timeout_s", c.oracle_timeout_s);
  read_field(j, "family_min_size", c.family_min_size);
  read_field(j, "family_min_sites", c.family_min_sites);
  read_field(j, "debounce_ms", c.debounce_ms);
  read_field(j, "auto_apply", c.auto_apply);
  read_field(j, "budget_ms", c.budget_ms);
  if (c.oracle_timeout_s <= 0 || c.debounce_ms < 0 || c.budget_ms < 0 || c.family_min_size < 2 ||
      c.family_min_sites < 1)
    throw Error(ErrorCode::InvalidArgument, "config value out of range");
  return c;
}

Config load_config(const fs::path& path) {
  auto text = slurp(path);
  return text ? parse_config(*text) : Config{};
}

std::unique_ptr<verify::CompilerOracle> make_oracle(const Config& config) {
  if (config.oracle_cmd.empty() || config.oracle_cmd == "none") return nullptr;
  if (config.oracle_cmd == "builtin") return std::make_unique<verify::MiniChecker>();
  return std::make_unique<verify::CommandOracle>(config.oracle_cmd, std::chrono::seconds(config.oracle_timeout_s));
}

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::PostEdit: return "post-edit";
    case EventKind::PreCommit: return "pre-commit";
    case EventKind::Manual: return "manual";
  }
  return "manual";
}

std::optional<EventKind> parse_event_kind(std::string_view text) noexcept {
  for (auto k : {EventKind::PostEdit, EventKind::PreCommit, EventKind::Manual})
    if (to_string(k) == text) return k;
  return std::nullopt;
}

HookEvent parse_hook_event(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::InvalidArgument, "hook event is not a JSON object");
  HookEvent ev;
  auto kind = j.find("event");
  if (kind == j.end() || !kind->is_string()) throw Error(ErrorCode::InvalidArgument, "hook event has no `event`");
  auto k = parse_event_kind(kind->get<std::string>());
  if (!k) throw Error(ErrorCode::InvalidArgument, "unknown hook event kind `" + kind->get<std::string>() + "`");
  ev.kind = *k;
  if (auto s = j.find("session"); s != j.end() && s->is_string()) ev.session = s->get<std::string>();
  if (auto c = j.find("changed"); c != j.end()) {
    if (!c->is_array()) throw Error(ErrorCode::InvalidArgument, "`changed` must be an array of paths");
    for (const auto& p : *c) {
      if (!p.is_string()) throw Error(ErrorCode::InvalidArgument, "`changed` must be an array of paths");
      const std::string raw = p.get<std::string>();
      const std::string norm = index::normalize_path(raw);
      if (raw.empty() || raw.front() == '/' || norm == ".." || norm.starts_with("../"))
        throw Error(ErrorCode::WorkspaceUnreadable, "path outside the workspace: " + raw);
      ev.changed.push_back(norm);
    }
  }
  return ev;
}

// ---- report JSON --------------------------------------------------------------

namespace {

json loc_json(const CodeLocation& l) { return {{"path", l.path}, {"line", l.line}, {"col", l.col}}; }

json failure_json(const FailureItem& f) {
  json locs = json::array();
  for (const auto& l : f.locations) locs.push_back(loc_json(l));
  json j = {{"id", f.id},
            {"kind", to_string(f.kind)},
            {"status", to_string(f.status)},
            {"severity", f.status == Status::Accepted ? "error" : "warning"},
            {"tier", verify::to_string(f.tier)},
            {"explanation", f.explanation},
            {"locations", std::move(locs)},
            {"messages", f.messages},
            {"missing_members", f.missing_members},
            {"fix_available", f.fix.has_value()},
            {"machine_actionable", f.machine_actionable}};
  if (f.fix)
    j["fix"] = {{"summary", f.fix->summary}, {"diff", f.fix->diff}, {"review_notes", f.fix->review_notes}};
  else
    j["fix_unavailable"] = f.fix_unavailable;
  return j;
}

}  // namespace

json report_to_json(const FeedbackReport& r) {
  json proposed = json::array();
  for (const auto& p : r.proposed)
    proposed.push_back({{"id", p.id},
                        {"kind", to_string(p.kind)},
                        {"location", loc_json(p.location)},
                        {"explanation", p.explanation},
                        {"members", p.members},
                        {"missing_members", p.missing_members},
                        {"machine_actionable", false}});
  json failures = json::array(), soft = json::array(), regressions = json::array();
  for (const auto& f : r.failures) failures.push_back(failure_json(f));
  for (const auto& f : r.soft_warnings) soft.push_back(failure_json(f));
  for (const auto& g : r.regressions)
    regressions.push_back({{"id", g.id},
                           {"location", loc_json(g.location)},
                           {"previous", g.previous},
                           {"current", g.current},
                           {"machine_actionable", true}});
  return {{"schema_version", r.schema_version},
          {"snapshot", r.snapshot},
          {"event", r.event},
          {"session", r.session},
          {"proposed", std::move(proposed)},
          {"failures", std::move(failures)},
          {"regressions", std::move(regressions)},
          {"soft_warnings", std::move(soft)},
          {"applied", r.applied},
          {"retired", r.retired},
          {"warnings", r.warnings},
          {"passed", r.passed},
          {"exit_code", r.exit_code}};
}

// ---- state ----------------------------------------------------------------------

PersistentState load_state(const fs::path& workspace) {
  PersistentState s;
  auto text = slurp(workspace / kStateFile);
  if (!text) return s;
  json j = json::parse(*text, nullptr, false);
  try {
    if (j.is_discarded()) throw json::other_error::create(0, "not JSON", nullptr);
    s.snapshot_counter = j.at("snapshot_counter").get<std::uint64_t>();
    if (j.contains("last_outcomes")) s.last_outcomes = j.at("last_outcomes").get<std::map<std::string, std::string>>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::StoreCorrupt, std::string(kStateFile) + " is malformed");
  }
  return s;
}

void save_state(const fs::path& workspace, const PersistentState& s) {
  json j = {{"snapshot_counter", s.snapshot_counter}, {"last_outcomes", s.last_outcomes}};
  store::write_atomic(workspace / kStateFile, j.dump(2) + "\n");
}

CodeLocation locate(const index::CodebaseIndex& idx, const SpecRecord& r) {
  if (auto scope = verify::resolve_anchor(idx, r)) return {scope->path, scope->span.line, scope->span.col};
  CodeLocation l{r.anchor.path, 1, 1};
  if (const auto* ast = idx.ast(r.anchor.path); ast && r.anchor.start <= ast->text().size()) {
    auto s = ast->make_span(r.anchor.start, r.anchor.start);
    l.line = s.line;
    l.col = s.col;
  }
  return l;
}

// ---- pipeline -----------------------------------------------------------------

namespace {

class FileLock {
 public:
  explicit FileLock(const fs::path& path) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorCode::StorageFailure, "cannot open lock file " + path.string());
    while (::flock(fd_, LOCK_EX) != 0)
      if (errno != EINTR) throw Error(ErrorCode::StorageFailure, "cannot lock " + path.string());
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

FailureItem make_failure(const index::CodebaseIndex& idx, const SpecRecord& r, const verify::Verdict& v) {
  FailureItem f;
  f.id = r.id;
  f.kind = r.kind;
  f.status = r.status;
  f.tier = v.tier;
  f.explanation = r.explanation;
  f.missing_members = v.missing_members;
  for (const auto& d : v.diagnostics) {
    f.locations.push_back({d.path, d.span.line, d.span.col});
    f.messages.push_back(d.message);
  }
  if (f.locations.empty()) f.locations.push_back(locate(idx, r));
  try {
    auto plan = fix::plan_fix(idx, r, v);
    f.fix = FixSummary{plan.summary, fix::plan_diff(idx, plan), plan.review_notes};
    f.machine_actionable = true;
  } catch (const Error& e) {
    f.fix_unavailable = std::string(to_string(e.code())) + ": " + e.message();
  }
  return f;
}

}  // namespace

Sidecar::Sidecar(fs::path workspace, Config config)
    : workspace_(std::move(workspace)), config_(std::move(config)), oracle_(make_oracle(config_)) {}

FeedbackReport Sidecar::handle(const HookEvent& event) {
  std::lock_guard guard(pipeline_);
  return run_locked(event);
}

FeedbackReport Sidecar::run_locked(const HookEvent& event) {
  std::error_code ec;
  if (!fs::is_directory(workspace_, ec))
    throw Error(ErrorCode::WorkspaceUnreadable, "workspace is not a directory: " + workspace_.string());
  for (const auto& p : event.changed) {
    const std::string norm = index::normalize_path(p);
    if (p.empty() || p.front() == '/' || norm == ".." || norm.starts_with("../"))
      throw Error(ErrorCode::WorkspaceUnreadable, "path outside the workspace: " + p);
  }
  FileLock lock(workspace_ / kLockFile);

  // Index: full build on the first pass, incremental afterwards.
  auto files = index::read_source_tree(workspace_.string());
  std::shared_ptr<const index::CodebaseIndex> idx;
  if (!last_index_) {
    index::IndexOptions opts;
    opts.family_min_size = config_.family_min_size;
    opts.family_min_sites = config_.family_min_sites;
    idx = std::make_shared<index::CodebaseIndex>(index::build_index(files, opts));
  } else {
    std::map<std::string, std::optional<std::string>> changed;
    for (const auto& [path, text] : files)
      if (!last_index_->contains(path) || last_index_->text(path) != text) changed[path] = text;
    for (const auto& path : last_index_->paths())
      if (!files.count(path)) changed[path] = std::nullopt;
    idx = changed.empty() ? last_index_
                          : std::make_shared<index::CodebaseIndex>(index::update_index(*last_index_, changed));
  }

  const fs::path store_path = workspace_ / store::kStoreFile;
  store::SpecStore st = store::load_or_empty(store_path);
  PersistentState state = load_state(workspace_);

  FeedbackReport report;
  report.event = std::string(to_string(event.kind));
  report.session = event.session;

  auto proposal = detect::propose_specs(*idx, detect::detect_all(*idx));
  st = store::upsert(st, proposal.records);
  st = store::age_anchors(
      st, [&](const SpecRecord& r) { return verify::anchor_resolves(*idx, r); }, 5, &report.retired);

  if (config_.auto_apply) {
    for (const auto& r : st.records()) {
      if (r.status != Status::Accepted) continue;
      auto v = verify::check_spec(*idx, r);
      if (v.outcome != verify::Outcome::Fail) continue;
      try {
        fix::DirectoryWorkspace ws(workspace_);
        auto result = fix::apply_fix(ws, *idx, fix::plan_fix(*idx, r, v), st);
        idx = std::make_shared<index::CodebaseIndex>(std::move(result.index));
        report.applied.push_back(r.id);
      } catch (const Error& e) {
        report.warnings.push_back("auto-apply skipped for " + r.id + ": " + e.what());
      }
    }
  }

  verify::VerifyOptions vopts;
  vopts.budget = std::chrono::milliseconds(config_.budget_ms);
  vopts.oracle = oracle_.get();
  vopts.workspace = workspace_;
  auto verification = verify::verify_all(*idx, st, vopts);

  for (const auto& r : st.records()) {
    if (r.status != Status::Proposed) continue;
    ProposedItem p{r.id, r.kind, locate(*idx, r), r.explanation, r.predicate.members, {}};
    if (r.predicate.union_ref)
      if (const auto* u = idx->find_union(*r.predicate.union_ref)) p.members = u->members;
    p.missing_members = verify::check_spec(*idx, r).missing_members;
    report.proposed.push_back(std::move(p));
  }

  std::map<std::string, std::string> outcomes;
  for (const auto& v : verification.verdicts) {
    const SpecRecord* r = st.find(v.record_id);
    if (!r) continue;
    const std::string now(verify::to_string(v.outcome));
    outcomes[v.record_id] = now;
    if (v.outcome == verify::Outcome::Fail) {
      auto item = make_failure(*idx, *r, v);
      (r->status == Status::Accepted ? report.failures : report.soft_warnings).push_back(std::move(item));
      auto prev = state.last_outcomes.find(r->id);
      if (prev != state.last_outcomes.end() && prev->second == "pass")
        report.regressions.push_back({r->id, locate(*idx, *r), prev->second, now});
    } else if (v.outcome == verify::Outcome::Pass) {
      ++report.passed;
    } else if (v.outcome == verify::Outcome::BudgetExceeded) {
      report.warnings.push_back("record " + r->id + ": compile tier not run within the budget");
    }
  }
  for (const auto& w : verification.warnings) report.warnings.push_back(w);

  state.snapshot_counter += 1;
  state.last_outcomes = std::move(outcomes);
  report.snapshot = state.snapshot_counter;
  report.exit_code = verification.hard_failures > 0 ? 2 : 0;

  store::persist(st, store_path);
  save_state(workspace_, state);

  last_index_ = idx;
  auto snap = std::make_shared<Snapshot>();
  snap->counter = state.snapshot_counter;
  snap->index = idx;
  snap->store = std::move(st);
  snap->verification = std::move(verification);
  snap->report = report;
  publish(std::move(snap));
  return report;
}

void Sidecar::publish(std::shared_ptr<const Snapshot> snap) {
  {
    std::lock_guard g(publish_mutex_);
    current_ = std::move(snap);
  }
  changed_.notify_all();
}

std::shared_ptr<const Snapshot> Sidecar::snapshot() const {
  std::lock_guard g(publish_mutex_);
  return current_;
}

std::shared_ptr<const Snapshot> Sidecar::wait_for_change(std::uint64_t since, std::chrono::milliseconds timeout) const {
  std::unique_lock g(publish_mutex_);
  changed_.wait_for(g, timeout, [&] { return current_ && current_->counter > since; });
  return current_;
}

FeedbackReport Sidecar::decide(const std::string& id, Status status, const std::string& actor) {
  std::lock_guard guard(pipeline_);
  const fs::path store_path = workspace_ / store::kStoreFile;
  {
    FileLock lock(workspace_ / kLockFile);
    auto st = store::set_status(store::load_or_empty(store_path), id, status, actor);
    store::persist(st, store_path);
  }
  return run_locked({EventKind::Manual, {}, actor});
}

fix::FixPlan Sidecar::plan_for(const std::string& id) const {
  auto snap = snapshot();
  if (!snap) throw Error(ErrorCode::InvalidArgument, "no analysis pass has run yet");
  const SpecRecord* r = snap->store.find(id);
  if (!r) throw Error(ErrorCode::UnknownId, "no record " + id);
  for (const auto& v : snap->verification.verdicts)
    if (v.record_id == id && v.outcome == verify::Outcome::Fail) return fix::plan_fix(*snap->index, *r, v);
  throw Error(ErrorCode::InvalidArgument, "record " + id + " has no failing verdict");
}

FeedbackReport Sidecar::apply(const std::string& id, const std::string& expected_snapshot) {
  std::lock_guard guard(pipeline_);
  auto snap = snapshot();
  if (!snap) throw Error(ErrorCode::InvalidArgument, "no analysis pass has run yet");
  if (!expected_snapshot.empty() && expected_snapshot != detect::snapshot_id(*snap->index))
    throw fix::FixError(ErrorCode::StaleSnapshot, "the workspace changed since the plan was shown");
  auto plan = plan_for(id);
  {
    FileLock lock(workspace_ / kLockFile);
    fix::DirectoryWorkspace ws(workspace_);
    auto result = fix::apply_fix(ws, *snap->index, plan, snap->store);
    last_index_ = std::make_shared<index::CodebaseIndex>(std::move(result.index));
  }
  return run_locked({EventKind::Manual, {}, "apply"});
}

}  // namespace vibeguard::sidecar
