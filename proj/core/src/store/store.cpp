#include "vibeguard/store.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vibeguard/error.hpp"
#include "vibeguard/util.hpp"

namespace vibeguard::store {

struct Mutator {
  static std::vector<SpecRecord>& records(SpecStore& s) { return s.records_; }
};

namespace {

bool live(const SpecRecord& r) { return r.status != Status::Rejected && r.status != Status::Retired; }

bool names_union(ScopeKind k) { return k == ScopeKind::DiscriminatedUnion || k == ScopeKind::UnionAlias; }

}  // namespace

std::string_view to_string(ConflictNature nature) noexcept {
  switch (nature) {
    case ConflictNature::Duplicate: return "duplicate";
    case ConflictNature::ContradictoryMembers: return "contradictory-members";
    case ConflictNature::NameCollision: return "name-collision";
  }
  return "duplicate";
}

SpecStore::SpecStore(std::vector<SpecRecord> records) : records_(std::move(records)) {}

const SpecRecord* SpecStore::find(std::string_view id) const {
  for (const auto& r : records_)
    if (r.id == id) return &r;
  return nullptr;
}

SpecStore upsert(const SpecStore& store, const std::vector<SpecRecord>& incoming, UpsertStats* stats) {
  SpecStore out = store;
  auto& recs = Mutator::records(out);
  for (const auto& r : incoming) {
    auto it = std::find_if(recs.begin(), recs.end(), [&](const SpecRecord& e) { return e.id == r.id; });
    if (it == recs.end()) {
      SpecRecord fresh = r;
      fresh.status = Status::Proposed;
      fresh.decided_at.clear();
      fresh.decided_by.clear();
      fresh.unresolved_streak = 0;
      recs.push_back(std::move(fresh));
      if (stats) stats->inserted.push_back(r.id);
    } else if (it->status == Status::Retired) {
      SpecRecord fresh = r;
      fresh.status = Status::Proposed;
      fresh.decided_at.clear();
      fresh.decided_by.clear();
      fresh.unresolved_streak = 0;
      *it = std::move(fresh);
      if (stats) stats->revived.push_back(r.id);
    } else if (it->status == Status::Rejected) {
      if (stats) stats->suppressed.push_back(r.id);
    }
  }
  return out;
}

SpecStore set_status(const SpecStore& store, std::string_view id, Status status, std::string_view actor,
                     std::string_view now) {
  SpecStore out = store;
  auto& recs = Mutator::records(out);
  auto it = std::find_if(recs.begin(), recs.end(), [&](const SpecRecord& e) { return e.id == id; });
  if (it == recs.end()) throw Error(ErrorCode::UnknownId, "unknown record id '" + std::string(id) + "'");
  if (!transition_allowed(it->status, status))
    throw Error(ErrorCode::IllegalTransition, "record " + it->id + ": cannot move from " +
                                                  std::string(to_string(it->status)) + " to " +
                                                  std::string(to_string(status)));
  it->status = status;
  it->decided_at = now.empty() ? rfc3339_now() : std::string(now);
  it->decided_by = std::string(actor);
  return out;
}

std::vector<ConflictReport> detect_conflicts(const SpecStore& store) {
  std::vector<ConflictReport> out;
  const auto& recs = store.records();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (!live(recs[i])) continue;
    for (std::size_t j = i + 1; j < recs.size(); ++j) {
      if (!live(recs[j])) continue;
      const auto& a = recs[i];
      const auto& b = recs[j];
      auto ka = overlap_key(a);
      if (a.kind == b.kind && ka == overlap_key(b)) {
        bool same = predicate_key(a.kind, a.predicate) == predicate_key(b.kind, b.predicate);
        out.push_back({a.id, b.id, ka, same ? ConflictNature::Duplicate : ConflictNature::ContradictoryMembers});
        continue;
      }
      if (names_union(a.kind) && names_union(b.kind) &&
          a.predicate.target_file == b.predicate.target_file &&
          a.predicate.proposed_name == b.predicate.proposed_name && a.predicate.members != b.predicate.members) {
        out.push_back({a.id, b.id, a.predicate.target_file + ":" + a.predicate.proposed_name,
                       ConflictNature::NameCollision});
      }
    }
  }
  return out;
}

SpecStore age_anchors(const SpecStore& store, const std::function<bool(const SpecRecord&)>& resolves,
                      std::uint32_t retire_after, std::vector<std::string>* retired) {
  SpecStore out = store;
  for (auto& r : Mutator::records(out)) {
    if (r.status == Status::Retired) continue;
    if (resolves(r)) {
      r.unresolved_streak = 0;
      continue;
    }
    if (++r.unresolved_streak >= retire_after) {
      r.status = Status::Retired;
      r.decided_at = rfc3339_now();
      r.decided_by = "retirement";
      if (retired) retired->push_back(r.id);
    }
  }
  return out;
}

std::string serialize(const SpecStore& store) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["records"] = nlohmann::json::array();
  for (const auto& r : store.records()) j["records"].push_back(r);
  return j.dump(2) + "\n";
}

SpecStore deserialize(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::StoreCorrupt, std::string("specs file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("schema_version") || !j["schema_version"].is_number_integer())
    throw Error(ErrorCode::StoreCorrupt, "specs file has no schema_version");
  if (j["schema_version"].get<int>() != kSchemaVersion)
    throw Error(ErrorCode::SchemaVersionMismatch,
                "unsupported schema_version " + j["schema_version"].dump() + " (expected " +
                    std::to_string(kSchemaVersion) + ")");
  if (!j.contains("records") || !j["records"].is_array())
    throw Error(ErrorCode::StoreCorrupt, "specs file has no records array");
  std::vector<SpecRecord> recs;
  std::set<std::string> seen;
  for (const auto& rj : j["records"]) {
    SpecRecord r = rj.get<SpecRecord>();
    auto expected = compute_record_id(r.kind, r.anchor, r.predicate);
    if (expected != r.id)
      throw Error(ErrorCode::IntegrityError,
                  "record " + r.id + ": id does not match its content (expected " + expected + ")");
    if (!seen.insert(r.id).second) throw Error(ErrorCode::StoreCorrupt, "duplicate record id " + r.id);
    recs.push_back(std::move(r));
  }
  return SpecStore(std::move(recs));
}

void write_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::StorageFailure, "cannot write " + tmp.string());
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    f.flush();
    if (!f) throw Error(ErrorCode::StorageFailure, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::StorageFailure, "cannot replace " + path.string());
  }
}

void persist(const SpecStore& store, const std::filesystem::path& path) { write_atomic(path, serialize(store)); }

SpecStore load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::StorageFailure, "cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return deserialize(ss.str());
}

SpecStore load_or_empty(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return {};
  return load(path);
}

}  // namespace vibeguard::store
