#pragma once

// The analysis loop driven by agent hook events, plus its file watcher and
// HTTP surface.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vibeguard/fix.hpp"
#include "vibeguard/index.hpp"
#include "vibeguard/store.hpp"
#include "vibeguard/verify.hpp"

namespace vibeguard::sidecar {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::string_view kConfigFile = ".vibeguard/config.json";
inline constexpr std::string_view kStateFile = ".vibeguard/state.json";
inline constexpr std::string_view kLockFile = ".vibeguard/lock";

struct Config {
  /// Shell command run in the workspace; "builtin" selects the mini-checker,
  /// "" or "none" disables the compile tier.
  std::string oracle_cmd = "tsc --noEmit -p .";
  int oracle_timeout_s = 60;
  std::size_t family_min_size = 3;
  std::size_t family_min_sites = 2;
  int debounce_ms = 300;
  bool auto_apply = false;
  int budget_ms = 10'000;

  friend bool operator==(const Config&, const Config&) = default;
};

/// Defaults for a missing file. Throws Error{InvalidArgument} on malformed
/// JSON or wrongly typed fields; unknown fields are ignored.
Config load_config(const std::filesystem::path& path);
Config parse_config(std::string_view json);

/// Null when the compile tier is disabled.
std::unique_ptr<verify::CompilerOracle> make_oracle(const Config& config);

enum class EventKind : std::uint8_t { PostEdit, PreCommit, Manual };
std::string_view to_string(EventKind kind) noexcept;
std::optional<EventKind> parse_event_kind(std::string_view text) noexcept;

struct HookEvent {
  EventKind kind = EventKind::Manual;
  std::vector<std::string> changed;  // normalized, workspace-relative
  std::string session;
  friend bool operator==(const HookEvent&, const HookEvent&) = default;
};

/// Throws Error{InvalidArgument} for malformed JSON or unknown kinds, and
/// Error{WorkspaceUnreadable} for paths that leave the workspace.
HookEvent parse_hook_event(std::string_view json);

// ---- feedback report ----------------------------------------------------------

struct CodeLocation {
  std::string path;
  std::uint32_t line = 1;
  std::uint32_t col = 1;
  friend bool operator==(const CodeLocation&, const CodeLocation&) = default;
};

struct ProposedItem {
  std::string id;
  ScopeKind kind = ScopeKind::ExhaustiveSwitch;
  CodeLocation location;
  std::string explanation;
  std::vector<std::string> members;          // union members the spec names
  std::vector<std::string> missing_members;  // members not yet handled
};

struct FixSummary {
  std::string summary;
  std::string diff;
  std::vector<std::string> review_notes;
};

struct FailureItem {
  std::string id;
  ScopeKind kind = ScopeKind::ExhaustiveSwitch;
  Status status = Status::Accepted;
  verify::Tier tier = verify::Tier::Syntactic;
  std::string explanation;
  std::vector<CodeLocation> locations;  // never empty
  std::vector<std::string> messages;
  std::vector<std::string> missing_members;
  std::optional<FixSummary> fix;
  std::string fix_unavailable;  // reason when no plan could be derived
  bool machine_actionable = false;
};

struct RegressionItem {
  std::string id;
  CodeLocation location;
  std::string previous;
  std::string current;
};

struct FeedbackReport {
  int schema_version = kReportSchemaVersion;
  std::uint64_t snapshot = 0;
  std::string event;
  std::string session;
  std::vector<ProposedItem> proposed;
  std::vector<FailureItem> failures;       // accepted records
  std::vector<FailureItem> soft_warnings;  // soft records
  std::vector<RegressionItem> regressions;
  std::vector<std::string> applied;        // record ids fixed by auto_apply
  std::vector<std::string> retired;
  std::vector<std::string> warnings;
  std::size_t passed = 0;
  int exit_code = 0;
};

nlohmann::json report_to_json(const FeedbackReport& report);

// ---- pipeline -----------------------------------------------------------------

/// Immutable state published after each pass, read concurrently.
struct Snapshot {
  std::uint64_t counter = 0;
  std::shared_ptr<const index::CodebaseIndex> index;
  store::SpecStore store;
  verify::VerificationReport verification;
  FeedbackReport report;
};

/// Persistent per-workspace counters kept in .vibeguard/state.json.
struct PersistentState {
  std::uint64_t snapshot_counter = 0;
  std::map<std::string, std::string> last_outcomes;
};

/// Owns the single pipeline mutator for one workspace. Passes are serialized
/// in-process by a mutex and across processes by a lock file.
class Sidecar {
 public:
  Sidecar(std::filesystem::path workspace, Config config);

  const std::filesystem::path& workspace() const noexcept { return workspace_; }
  const Config& config() const noexcept { return config_; }

  /// Full pipeline. Errors propagate (exit code 1 is the caller's mapping).
  FeedbackReport handle(const HookEvent& event);

  /// Current snapshot; null before the first pass.
  std::shared_ptr<const Snapshot> snapshot() const;
  /// Blocks until the counter exceeds `since` or the timeout passes.
  std::shared_ptr<const Snapshot> wait_for_change(std::uint64_t since, std::chrono::milliseconds timeout) const;

  /// set_status + persist + a manual pass.
  FeedbackReport decide(const std::string& id, Status status, const std::string& actor);

  /// Plan for a failing record on the current snapshot. Throws Error
  /// (UnknownId, InvalidArgument when not failing, UnfixableScope,
  /// AmbiguousFix).
  fix::FixPlan plan_for(const std::string& id) const;

  /// Plans against the latest snapshot, applies through the filesystem and
  /// runs a pass. `expected_snapshot`, when given, must equal the snapshot id
  /// the caller saw or StaleSnapshot is raised.
  FeedbackReport apply(const std::string& id, const std::string& expected_snapshot = {});

 private:
  FeedbackReport run_locked(const HookEvent& event);
  void publish(std::shared_ptr<const Snapshot> snap);

  std::filesystem::path workspace_;
  Config config_;
  std::unique_ptr<verify::CompilerOracle> oracle_;
  std::mutex pipeline_;
  mutable std::mutex publish_mutex_;
  mutable std::condition_variable changed_;
  std::shared_ptr<const Snapshot> current_;
  std::shared_ptr<const index::CodebaseIndex> last_index_;
};

PersistentState load_state(const std::filesystem::path& workspace);
void save_state(const std::filesystem::path& workspace, const PersistentState& state);

/// Location of a record's scope on `index` (resolved anchor, or the stored
/// anchor span when it no longer resolves).
CodeLocation locate(const index::CodebaseIndex& index, const SpecRecord& record);

// ---- watch --------------------------------------------------------------------

/// Coalesces change notifications into one pass per quiet period.
class Debouncer {
 public:
  using Clock = std::chrono::steady_clock;
  explicit Debouncer(std::chrono::milliseconds quiet) : quiet_(quiet) {}
  void notify(Clock::time_point now);
  /// True once, when a burst has been quiet for the configured period.
  bool due(Clock::time_point now);
  bool pending() const noexcept { return pending_; }
  std::optional<Clock::time_point> deadline() const;

 private:
  std::chrono::milliseconds quiet_;
  bool pending_ = false;
  Clock::time_point last_{};
};

/// Source of workspace change notifications.
class ChangeSource {
 public:
  virtual ~ChangeSource() = default;
  /// Changed workspace-relative paths seen within `timeout`; may be empty.
  virtual std::vector<std::string> wait(std::chrono::milliseconds timeout) = 0;
  virtual std::string name() const = 0;
};

/// inotify over every non-hidden directory. Throws Error{WatchUnavailable}.
std::unique_ptr<ChangeSource> make_inotify_source(const std::filesystem::path& root);
/// mtime/size scan of source files every `interval`.
std::unique_ptr<ChangeSource> make_polling_source(const std::filesystem::path& root,
                                                  std::chrono::milliseconds interval);

struct WatchOptions {
  std::chrono::milliseconds debounce{300};
  std::chrono::milliseconds poll_interval{2000};
  bool force_polling = false;
  std::function<void(const FeedbackReport&)> on_report;
  std::function<void(const std::string&)> on_log;
};

/// Runs until `stop` is set. Falls back to polling when inotify is missing.
void watch(Sidecar& sidecar, const WatchOptions& options, const std::atomic<bool>& stop);

// ---- HTTP -------------------------------------------------------------------

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 7173;
  std::chrono::milliseconds long_poll{25'000};
  /// Optional directory served at / (the review panel's static assets).
  std::filesystem::path static_dir;
};

/// HTTP status for a library error.
int http_status(ErrorCode code) noexcept;

class Server {
 public:
  Server(Sidecar& sidecar, ServeOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds; throws Error{BindFailure}. Returns the bound port.
  int bind();
  /// Serves until stop(). bind() must have succeeded.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// "host:port" -> pair. Throws Error{InvalidArgument}.
std::pair<std::string, int> parse_address(std::string_view address);

}  // namespace vibeguard::sidecar
