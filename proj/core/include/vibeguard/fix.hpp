#pragma once

// Edit plans that realize a specification, and their validated application.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vibeguard/error.hpp"
#include "vibeguard/index.hpp"
#include "vibeguard/record.hpp"
#include "vibeguard/store.hpp"
#include "vibeguard/verify.hpp"

namespace vibeguard::fix {

inline constexpr std::string_view kAssertNeverSource =
    "export function assertNever(x: never): never {\n"
    "  throw new Error(`Unexpected case: ${JSON.stringify(x)}`);\n"
    "}\n";

inline constexpr std::string_view kGuardComment = "// side-car: exhaustive guard";

struct TextEdit {
  std::string path;
  std::uint32_t start = 0;  // byte offsets in the pre-edit file
  std::uint32_t end = 0;
  std::string replacement;
  bool empty_range() const noexcept { return start == end; }
  friend bool operator==(const TextEdit&, const TextEdit&) = default;
};

struct FixPlan {
  std::string record_id;
  /// Per file, descending start offset; never overlapping.
  std::vector<TextEdit> edits;
  std::string summary;
  std::map<std::string, std::string> creates_files;
  /// Things a reviewer should look at (placeholders, unstubbed members).
  std::vector<std::string> review_notes;
  /// SHA-256 of each edited file's text at planning time.
  std::map<std::string, std::string> file_hashes;
  std::string snapshot;
  friend bool operator==(const FixPlan&, const FixPlan&) = default;
};

/// Throws Error{UnfixableScope} when the anchor no longer resolves,
/// Error{AmbiguousFix} when no sound edit can be derived, and
/// Error{InvalidArgument} when the verdict is not a failure.
FixPlan plan_fix(const index::CodebaseIndex& index, const SpecRecord& record, const verify::Verdict& verdict);

nlohmann::json plan_to_json(const FixPlan& plan);

/// Applies `edits` to `text`; insertions at one offset keep their list order. Throws Error{SpanOutOfBounds} or
/// Error{InvalidArgument} on overlap.
std::string apply_edits(std::string_view text, std::vector<TextEdit> edits);

/// Post-edit contents of every file the plan touches or creates.
std::map<std::string, std::string> preview(const index::CodebaseIndex& index, const FixPlan& plan);

/// Line-based unified diff with `context` lines of context. Empty when equal.
std::string unified_diff(const std::string& old_path, const std::string& new_path, std::string_view before,
                         std::string_view after, int context = 3);

/// Diff of every file in the plan against the index contents.
std::string plan_diff(const index::CodebaseIndex& index, const FixPlan& plan);

class Workspace {
 public:
  virtual ~Workspace() = default;
  virtual std::optional<std::string> read(const std::string& path) const = 0;
  /// Throws Error{StorageFailure}.
  virtual void write(const std::string& path, const std::string& text) = 0;
  virtual void remove(const std::string& path) = 0;
};

class DirectoryWorkspace final : public Workspace {
 public:
  explicit DirectoryWorkspace(std::filesystem::path root);
  std::optional<std::string> read(const std::string& path) const override;
  void write(const std::string& path, const std::string& text) override;
  void remove(const std::string& path) override;
  const std::filesystem::path& root() const noexcept { return root_; }

 private:
  std::filesystem::path root_;
};

class MemoryWorkspace final : public Workspace {
 public:
  MemoryWorkspace() = default;
  explicit MemoryWorkspace(std::map<std::string, std::string> files) : files_(std::move(files)) {}
  std::optional<std::string> read(const std::string& path) const override;
  void write(const std::string& path, const std::string& text) override;
  void remove(const std::string& path) override;
  const std::map<std::string, std::string>& files() const noexcept { return files_; }

  /// Makes the write after the next `n` successful writes throw.
  void fail_after_writes(int n) { fail_after_ = n; }
  /// Replaces the text the next read of `path` returns after a write, to
  /// simulate a file that does not round-trip.
  void corrupt_on_write(std::string path, std::string text) { corrupt_[std::move(path)] = std::move(text); }

 private:
  std::map<std::string, std::string> files_;
  std::map<std::string, std::string> corrupt_;
  int fail_after_ = -1;
};

struct ApplyResult {
  index::CodebaseIndex index;
  std::vector<std::string> touched;
  std::optional<verify::Verdict> origin;
};

/// Raised by apply_fix after rolling back; carries the regressed record ids.
class FixError : public Error {
 public:
  FixError(ErrorCode code, const std::string& message, std::vector<std::string> records = {})
      : Error(code, message), records_(std::move(records)) {}
  const std::vector<std::string>& records() const noexcept { return records_; }

 private:
  std::vector<std::string> records_;
};

/// Writes the plan, re-reads and re-parses every touched file, re-checks the
/// originating record and every accepted record at tier 1, and restores the
/// exact previous bytes on any failure. Throws FixError with StaleSnapshot,
/// PostEditParseFailure, RegressionDetected or StorageFailure.
ApplyResult apply_fix(Workspace& workspace, const index::CodebaseIndex& current, const FixPlan& plan,
                      const store::SpecStore& store);

/// Module specifier for importing `to_file` from `from_file` ("./x", "../y").
std::string relative_module(const std::string& from_file, const std::string& to_file);

}  // namespace vibeguard::fix
