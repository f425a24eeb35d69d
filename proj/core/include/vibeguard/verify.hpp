#pragma once

// Tiered checking of accepted and soft records: index lookups first, then at
// most one workspace-wide compiler run.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vibeguard/index.hpp"
#include "vibeguard/record.hpp"
#include "vibeguard/store.hpp"

namespace vibeguard::verify {

enum class Tier : std::uint8_t { Syntactic, Compile };
enum class Outcome : std::uint8_t { Pass, Fail, NotApplicable, BudgetExceeded };
enum class Severity : std::uint8_t { Error, Warning };
std::string_view to_string(Tier tier) noexcept;
std::string_view to_string(Outcome outcome) noexcept;
std::string_view to_string(Severity severity) noexcept;

struct VerdictDiagnostic {
  std::string path;
  Span span;
  std::string message;
  Severity severity = Severity::Error;
  friend bool operator==(const VerdictDiagnostic&, const VerdictDiagnostic&) = default;
};

struct Verdict {
  std::string record_id;
  Tier tier = Tier::Syntactic;
  Outcome outcome = Outcome::Pass;
  /// Outcome of the index-level check alone.
  Outcome syntactic_outcome = Outcome::Pass;
  /// Passed only through the assertNever / satisfies disjunct, so the
  /// compiler decides the rest.
  bool needs_compile = false;
  std::vector<VerdictDiagnostic> diagnostics;
  std::vector<std::string> missing_members;
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

/// Where a record's scope currently is, after re-resolving its anchor by
/// declaration name first and span second.
struct ResolvedScope {
  std::string path;
  Span span;
};

std::optional<ResolvedScope> resolve_anchor(const index::CodebaseIndex& index, const SpecRecord& record);
bool anchor_resolves(const index::CodebaseIndex& index, const SpecRecord& record);

// Anchor lookups, also used by the fix generator. Null when absent.
const index::SwitchSite* locate_switch(const index::CodebaseIndex& index, const Anchor& anchor);
const index::ComparisonChain* locate_chain(const index::CodebaseIndex& index, const Anchor& anchor);
/// The switch a discriminated_union record's chain was rewritten into.
const index::SwitchSite* locate_rewritten_switch(const index::CodebaseIndex& index, const SpecRecord& record);
const index::LiteralFamily* locate_family(const index::CodebaseIndex& index, const Anchor& anchor);
const index::MappingLiteral* locate_mapping(const index::CodebaseIndex& index, const Anchor& anchor);

/// Tier-1 only; never runs an external process. Any status is accepted;
/// severity follows the status (soft -> warning).
Verdict check_spec(const index::CodebaseIndex& index, const SpecRecord& record);

// ---- compiler oracle -------------------------------------------------------

struct OracleDiagnostic {
  std::string file;
  std::uint32_t line = 0;
  std::uint32_t col = 0;
  std::string severity;  // "error" | "warning"
  std::string code;      // "TS2345"
  std::string message;
  friend bool operator==(const OracleDiagnostic&, const OracleDiagnostic&) = default;
};

struct CompileResult {
  int exit_status = 0;
  std::vector<OracleDiagnostic> diagnostics;
  std::string output;
};

class CompilerOracle {
 public:
  virtual ~CompilerOracle() = default;
  virtual std::string name() const = 0;
  /// Must not modify the workspace. Throws Error{OracleUnavailable} or
  /// Error{OracleTimeout}.
  virtual CompileResult run(const std::filesystem::path& workspace) const = 0;
};

/// Runs `sh -c <command>` inside the workspace. Exit 127 (command not found)
/// is reported as OracleUnavailable.
class CommandOracle final : public CompilerOracle {
 public:
  CommandOracle(std::string command, std::chrono::milliseconds timeout = std::chrono::seconds(60));
  std::string name() const override { return command_; }
  CompileResult run(const std::filesystem::path& workspace) const override;

 private:
  std::string command_;
  std::chrono::milliseconds timeout_;
};

/// Hermetic checker over the analyzed subset: switch exhaustiveness narrowing
/// into assertNever (TS2345), case labels outside the union (TS2678),
/// satisfies / annotated Record key totality (TS2741, TS2739, TS2353) and
/// unresolved assertNever or union references (TS2304). Emits the same line
/// format as tsc.
class MiniChecker final : public CompilerOracle {
 public:
  std::string name() const override { return "builtin"; }
  CompileResult run(const std::filesystem::path& workspace) const override;
  /// Same checks over an in-memory index.
  static CompileResult check(const index::CodebaseIndex& index);
};

/// `path(line,col): error TS1234: message`, with indented continuation lines
/// appended to the previous message.
std::vector<OracleDiagnostic> parse_diagnostics(std::string_view output);
std::string format_diagnostic(const OracleDiagnostic& d);

CompileResult compile_check(const std::filesystem::path& workspace, const CompilerOracle& oracle);

struct DiagnosticMapping {
  /// Per input record index, the diagnostics its resolved scope contains.
  std::vector<std::vector<OracleDiagnostic>> per_record;
  std::vector<OracleDiagnostic> unmapped;
};

/// Each diagnostic goes to the innermost containing scope; ties go to the
/// smaller record id.
DiagnosticMapping map_diagnostics(const index::CodebaseIndex& index, const std::vector<SpecRecord>& records,
                                  const std::vector<OracleDiagnostic>& diagnostics);

// ---- verify_all ------------------------------------------------------------

struct VerifyOptions {
  std::chrono::milliseconds budget{10'000};
  const CompilerOracle* oracle = nullptr;  // null: tier 2 skipped
  std::filesystem::path workspace;
  std::function<std::chrono::steady_clock::time_point()> clock;  // injectable
};

struct VerificationReport {
  std::vector<Verdict> verdicts;  // hard before soft, then anchor path
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::size_t not_applicable = 0;
  std::size_t budget_exceeded = 0;
  std::size_t hard_failures = 0;
  std::size_t oracle_invocations = 0;
  std::vector<OracleDiagnostic> unmapped;
  std::vector<std::string> warnings;
};

VerificationReport verify_all(const index::CodebaseIndex& index, const store::SpecStore& store,
                              const VerifyOptions& options = {});

}  // namespace vibeguard::verify
