#pragma once

// Persistent set of specification records with review lifecycle.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "vibeguard/record.hpp"

namespace vibeguard::store {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kStoreFile = ".vibeguard/specs.json";

enum class ConflictNature : std::uint8_t { Duplicate, ContradictoryMembers, NameCollision };
std::string_view to_string(ConflictNature nature) noexcept;

struct ConflictReport {
  std::string first;
  std::string second;
  std::string overlap;  // shared overlap key or "<file>:<union name>"
  ConflictNature nature = ConflictNature::Duplicate;
  friend bool operator==(const ConflictReport&, const ConflictReport&) = default;
};

/// Records in insertion order. Values are immutable snapshots; every
/// operation returns a new store.
class SpecStore {
 public:
  SpecStore() = default;
  explicit SpecStore(std::vector<SpecRecord> records);

  const std::vector<SpecRecord>& records() const noexcept { return records_; }
  const SpecRecord* find(std::string_view id) const;
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  friend bool operator==(const SpecStore&, const SpecStore&) = default;

 private:
  friend struct Mutator;
  std::vector<SpecRecord> records_;
};

struct UpsertStats {
  std::vector<std::string> inserted;
  std::vector<std::string> suppressed;  // matched a rejected record
  std::vector<std::string> revived;     // matched a retired record
};

/// New ids are inserted as proposed; existing ids are left untouched, except
/// retired records, which come back as proposed when proposed again.
SpecStore upsert(const SpecStore& store, const std::vector<SpecRecord>& records, UpsertStats* stats = nullptr);

/// Throws Error{UnknownId} or Error{IllegalTransition}.
SpecStore set_status(const SpecStore& store, std::string_view id, Status status, std::string_view actor,
                     std::string_view now = {});

/// Every pair of non-rejected, non-retired records that target the same thing
/// (duplicate / contradictory-members) or propose the same union name in the
/// same file with different members (name-collision).
std::vector<ConflictReport> detect_conflicts(const SpecStore& store);

/// Counts consecutive snapshots in which a record's anchor failed to resolve
/// and retires it once the count reaches `retire_after`.
SpecStore age_anchors(const SpecStore& store, const std::function<bool(const SpecRecord&)>& resolves,
                      std::uint32_t retire_after = 5, std::vector<std::string>* retired = nullptr);

std::string serialize(const SpecStore& store);
/// Throws Error{StoreCorrupt}, Error{SchemaVersionMismatch} or
/// Error{IntegrityError} (an id that does not match its record's content).
SpecStore deserialize(std::string_view text);

/// Atomic write (temp file + rename). Throws Error{StorageFailure}.
void persist(const SpecStore& store, const std::filesystem::path& path);
SpecStore load(const std::filesystem::path& path);
/// Empty store when `path` does not exist.
SpecStore load_or_empty(const std::filesystem::path& path);

/// Writes `contents` to `path` through a sibling temp file and rename.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace vibeguard::store
