#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "test_support.hpp"
#include "vibeguard/detect.hpp"
#include "vibeguard/error.hpp"
#include "vibeguard/store.hpp"

namespace {

using namespace vibeguard;

std::vector<SpecRecord> corpus_records(const std::string& name) {
  const auto idx = index::build_index(vgtest::read_corpus(name));
  detect::ProposeOptions o;
  o.now = "2026-01-01T00:00:00Z";
  return detect::propose_specs(idx, detect::detect_all(idx), o).records;
}

template <typename Fn>
ErrorCode code_of(Fn fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

TEST(Store, TransitionTable) {
  using S = Status;
  EXPECT_TRUE(transition_allowed(S::Proposed, S::Accepted));
  EXPECT_TRUE(transition_allowed(S::Proposed, S::Rejected));
  EXPECT_TRUE(transition_allowed(S::Proposed, S::Soft));
  EXPECT_TRUE(transition_allowed(S::Accepted, S::Soft));
  EXPECT_TRUE(transition_allowed(S::Soft, S::Accepted));
  EXPECT_TRUE(transition_allowed(S::Rejected, S::Retired));
  EXPECT_FALSE(transition_allowed(S::Rejected, S::Accepted));
  EXPECT_FALSE(transition_allowed(S::Accepted, S::Proposed));
  EXPECT_FALSE(transition_allowed(S::Retired, S::Accepted));
  EXPECT_FALSE(transition_allowed(S::Retired, S::Retired));
  EXPECT_FALSE(transition_allowed(S::Accepted, S::Accepted));
}

TEST(Store, SetStatusRecordsDecision) {
  const auto recs = corpus_records("listing1");
  auto st = store::upsert({}, recs);
  ASSERT_EQ(st.size(), 2u);
  st = store::set_status(st, recs[0].id, Status::Accepted, "alice", "2026-02-02T00:00:00Z");
  const auto* r = st.find(recs[0].id);
  EXPECT_EQ(r->status, Status::Accepted);
  EXPECT_EQ(r->decided_by, "alice");
  EXPECT_EQ(r->decided_at, "2026-02-02T00:00:00Z");
  EXPECT_EQ(code_of([&] { store::set_status(st, recs[0].id, Status::Rejected, "bob"); }),
            ErrorCode::IllegalTransition);
  EXPECT_EQ(code_of([&] { store::set_status(st, "ffffffffffffffff", Status::Accepted, "bob"); }),
            ErrorCode::UnknownId);
}

TEST(Store, UpsertKeepsDecisionsAndSuppressesRejected) {
  const auto recs = corpus_records("listing1");
  auto st = store::upsert({}, recs);
  st = store::set_status(st, recs[0].id, Status::Rejected, "a");
  st = store::set_status(st, recs[1].id, Status::Accepted, "a");
  store::UpsertStats stats;
  const auto again = store::upsert(st, recs, &stats);
  EXPECT_EQ(again, st);
  EXPECT_TRUE(stats.inserted.empty());
  EXPECT_EQ(stats.suppressed, std::vector<std::string>{recs[0].id});
}

TEST(Store, RetiredRecordsRevive) {
  const auto recs = corpus_records("listing1");
  auto st = store::upsert({}, recs);
  std::vector<std::string> retired;
  for (int i = 0; i < 5; ++i) st = store::age_anchors(st, [](const SpecRecord&) { return false; }, 5, &retired);
  EXPECT_EQ(retired.size(), 2u);
  EXPECT_EQ(st.find(recs[0].id)->status, Status::Retired);
  EXPECT_EQ(st.find(recs[0].id)->decided_by, "retirement");
  store::UpsertStats stats;
  st = store::upsert(st, {recs[0]}, &stats);
  EXPECT_EQ(stats.revived, std::vector<std::string>{recs[0].id});
  EXPECT_EQ(st.find(recs[0].id)->status, Status::Proposed);
  EXPECT_EQ(st.find(recs[0].id)->unresolved_streak, 0u);
}

TEST(Store, AgingResetsOnResolution) {
  const auto recs = corpus_records("listing1");
  auto st = store::upsert({}, recs);
  bool resolves = false;
  auto pred = [&](const SpecRecord&) { return resolves; };
  for (int i = 0; i < 4; ++i) st = store::age_anchors(st, pred);
  EXPECT_EQ(st.records()[0].unresolved_streak, 4u);
  resolves = true;
  st = store::age_anchors(st, pred);
  EXPECT_EQ(st.records()[0].unresolved_streak, 0u);
  resolves = false;
  for (int i = 0; i < 4; ++i) st = store::age_anchors(st, pred);
  EXPECT_EQ(st.records()[0].status, Status::Proposed);
}

TEST(Store, ConflictDetection) {
  auto recs = corpus_records("listing2");
  ASSERT_EQ(recs.size(), 1u);
  SpecRecord other = recs[0];
  other.predicate.members.pop_back();
  other.id = compute_record_id(other.kind, other.anchor, other.predicate);
  auto st = store::upsert({}, {recs[0], other});
  auto conflicts = store::detect_conflicts(st);
  ASSERT_EQ(conflicts.size(), 1u);
  EXPECT_EQ(conflicts[0].nature, store::ConflictNature::ContradictoryMembers);

  // Same name, same file, different subject: a name collision.
  SpecRecord elsewhere = other;
  elsewhere.anchor.decl = "otherReducer";
  elsewhere.predicate.subject_decl->decl = "OtherAction";
  elsewhere.id = compute_record_id(elsewhere.kind, elsewhere.anchor, elsewhere.predicate);
  st = store::upsert({}, {recs[0], elsewhere});
  conflicts = store::detect_conflicts(st);
  ASSERT_EQ(conflicts.size(), 1u);
  EXPECT_EQ(conflicts[0].nature, store::ConflictNature::NameCollision);
  EXPECT_EQ(conflicts[0].overlap, "reducer.ts:ActionType");

  // Rejected records drop out.
  st = store::set_status(st, elsewhere.id, Status::Rejected, "a");
  EXPECT_TRUE(store::detect_conflicts(st).empty());
}

TEST(Store, TwoRecordRoundTrip) {
  const auto st = store::set_status(store::upsert({}, corpus_records("listing1")),
                                    corpus_records("listing1")[0].id, Status::Soft, "x", "2026-01-02T00:00:00Z");
  EXPECT_EQ(store::deserialize(store::serialize(st)), st);
  vgtest::TempDir dir;
  const auto path = dir.path() / ".vibeguard" / "specs.json";
  store::persist(st, path);
  EXPECT_EQ(store::load(path), st);
  EXPECT_TRUE(store::load_or_empty(dir.path() / "nope.json").empty());
}

TEST(Store, DeserializeRejectsBadInput) {
  EXPECT_EQ(code_of([] { store::deserialize("{not json"); }), ErrorCode::StoreCorrupt);
  EXPECT_EQ(code_of([] { store::deserialize(R"({"records": []})"); }), ErrorCode::StoreCorrupt);
  EXPECT_EQ(code_of([] { store::deserialize(R"({"schema_version": 99, "records": []})"); }),
            ErrorCode::SchemaVersionMismatch);
  auto j = nlohmann::json::parse(store::serialize(store::upsert({}, corpus_records("listing1"))));
  j["records"][0]["predicate"]["behavior"] = "cases-equal-members";
  const auto tampered = j.dump();
  const auto code = code_of([&] { store::deserialize(tampered); });
  EXPECT_TRUE(code == ErrorCode::IntegrityError || code == ErrorCode::StoreCorrupt);
  j = nlohmann::json::parse(store::serialize(store::upsert({}, corpus_records("listing1"))));
  j["records"][0]["id"] = "0123456789abcdef";
  EXPECT_EQ(code_of([&] { store::deserialize(j.dump()); }), ErrorCode::IntegrityError);
}

TEST(Store, PersistIsAtomic) {
  vgtest::TempDir dir;
  const auto path = dir.path() / "specs.json";
  store::persist(store::upsert({}, corpus_records("listing1")), path);
  store::persist({}, path);
  EXPECT_TRUE(store::load(path).empty());
  std::size_t entries = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) {
    (void)e;
    ++entries;
  }
  EXPECT_EQ(entries, 1u);  // no temp files left behind
  EXPECT_EQ(code_of([&] { store::persist({}, dir.path() / "specs.json" / "x"); }), ErrorCode::StorageFailure);
}

}  // namespace
