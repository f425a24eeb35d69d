#include <gtest/gtest.h>

#include "test_support.hpp"
#include "vibeguard/error.hpp"
#include "vibeguard/sidecar.hpp"

namespace {

using namespace vibeguard;
using namespace vibeguard::sidecar;

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

Config offline() {
  Config c;
  c.oracle_cmd = "none";
  return c;
}

TEST(Config, Parsing) {
  EXPECT_EQ(parse_config("{}"), Config{});
  const auto c = parse_config(R"({"oracle_cmd":"builtin","debounce_ms":50,"auto_apply":true,"extra":1})");
  EXPECT_EQ(c.oracle_cmd, "builtin");
  EXPECT_EQ(c.debounce_ms, 50);
  EXPECT_TRUE(c.auto_apply);
  EXPECT_EQ(code_of([] { parse_config("{"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_config(R"({"debounce_ms":"soon"})"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_config("[]"); }), ErrorCode::InvalidArgument);
  vgtest::TempDir dir;
  EXPECT_EQ(load_config(dir.path() / "missing.json"), Config{});
}

TEST(Config, Oracles) {
  EXPECT_EQ(make_oracle(offline()), nullptr);
  Config c;
  c.oracle_cmd = "";
  EXPECT_EQ(make_oracle(c), nullptr);
  c.oracle_cmd = "builtin";
  EXPECT_NE(make_oracle(c), nullptr);
}

TEST(HookEvents, Parsing) {
  const auto e = parse_hook_event(R"({"event":"post-edit","changed":["./a.ts","src//b.tsx"],"session":"s1"})");
  EXPECT_EQ(e.kind, EventKind::PostEdit);
  EXPECT_EQ(e.changed, (std::vector<std::string>{"a.ts", "src/b.tsx"}));
  EXPECT_EQ(e.session, "s1");
  EXPECT_EQ(parse_hook_event(R"({"event":"manual"})").kind, EventKind::Manual);
  EXPECT_EQ(parse_hook_event(R"({"event":"pre-commit","changed":[]})").kind, EventKind::PreCommit);
  EXPECT_EQ(code_of([] { parse_hook_event(R"({"event":"save"})"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_hook_event("not json"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_hook_event(R"({"event":"manual","changed":"a.ts"})"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_hook_event(R"({"event":"manual","changed":["/etc/passwd"]})"); }),
            ErrorCode::WorkspaceUnreadable);
  EXPECT_EQ(code_of([] { parse_hook_event(R"({"event":"manual","changed":["../x.ts"]})"); }),
            ErrorCode::WorkspaceUnreadable);
  for (auto k : {EventKind::PostEdit, EventKind::PreCommit, EventKind::Manual})
    EXPECT_EQ(parse_event_kind(to_string(k)), k);
}

TEST(Pipeline, ProposalsDoNotBlockThenAcceptedFailuresDo) {
  vgtest::TempDir dir;
  dir.copy_corpus("listing1");
  Sidecar sc(dir.path(), offline());
  EXPECT_EQ(sc.snapshot(), nullptr);

  const auto first = sc.handle({EventKind::PostEdit, {"orderProcessor.ts"}, "s"});
  EXPECT_EQ(first.exit_code, 0);
  EXPECT_EQ(first.snapshot, 1u);
  ASSERT_EQ(first.proposed.size(), 2u);
  EXPECT_TRUE(first.failures.empty());
  for (const auto& p : first.proposed) {
    EXPECT_EQ(p.kind, ScopeKind::ExhaustiveSwitch);
    EXPECT_EQ(p.members, (std::vector<std::string>{"pending", "paid", "shipped", "cancelled"}));
    EXPECT_EQ(p.missing_members.size(), 1u);
  }

  auto report = first;
  for (const auto& p : first.proposed) report = sc.decide(p.id, Status::Accepted, "test");
  EXPECT_EQ(report.exit_code, 2);
  EXPECT_EQ(report.failures.size(), 2u);
  EXPECT_TRUE(report.proposed.empty());
  for (const auto& f : report.failures) {
    EXPECT_TRUE(f.fix.has_value());
    EXPECT_FALSE(f.locations.empty());
    EXPECT_FALSE(f.fix->diff.empty());
  }
  EXPECT_GT(report.snapshot, first.snapshot);
  EXPECT_EQ(load_state(dir.path()).snapshot_counter, report.snapshot);
  EXPECT_TRUE(vgtest::fs::exists(dir.path() / store::kStoreFile));
  ASSERT_NE(sc.snapshot(), nullptr);
  EXPECT_EQ(sc.snapshot()->counter, report.snapshot);
}

TEST(Pipeline, ApplyFixesAndStalenessIsChecked) {
  vgtest::TempDir dir;
  dir.copy_corpus("listing1");
  Sidecar sc(dir.path(), offline());
  auto report = sc.handle({EventKind::Manual, {}, "s"});
  for (const auto& p : std::vector<ProposedItem>(report.proposed)) sc.decide(p.id, Status::Accepted, "t");
  const auto ids = [&] {
    std::vector<std::string> out;
    for (const auto& f : sc.snapshot()->report.failures) out.push_back(f.id);
    return out;
  }();
  ASSERT_EQ(ids.size(), 2u);
  EXPECT_EQ(code_of([&] { sc.apply(ids[0], "0000000000000000"); }), ErrorCode::StaleSnapshot);
  EXPECT_EQ(code_of([&] { sc.apply("ffffffffffffffff"); }), ErrorCode::UnknownId);
  sc.apply(ids[0]);
  report = sc.apply(ids[1]);
  EXPECT_EQ(report.exit_code, 0);
  EXPECT_TRUE(report.failures.empty());
  EXPECT_EQ(report.passed, 2u);
  EXPECT_EQ(dir.read("assertNever.ts"), fix::kAssertNeverSource);
  EXPECT_EQ(code_of([&] { sc.plan_for(ids[0]); }), ErrorCode::InvalidArgument);
}

TEST(Pipeline, RegressionsAreReported) {
  vgtest::TempDir dir;
  dir.copy_corpus("listing1");
  Sidecar sc(dir.path(), offline());
  auto report = sc.handle({EventKind::Manual, {}, "s"});
  for (const auto& p : std::vector<ProposedItem>(report.proposed)) sc.decide(p.id, Status::Accepted, "t");
  for (const auto& f : std::vector<FailureItem>(sc.snapshot()->report.failures)) sc.apply(f.id);
  const auto original = dir.read("orderUI.tsx");
  const auto shipped = original.find("case 'shipped'");
  ASSERT_NE(shipped, std::string::npos);
  auto broken = original;
  broken.erase(shipped, original.find('\n', shipped) - shipped);
  // Without the guard as well, the spec no longer holds.
  const auto guard = broken.find("default: return assertNever(status);");
  ASSERT_NE(guard, std::string::npos);
  broken.erase(guard, std::string("default: return assertNever(status);").size());
  dir.write("orderUI.tsx", broken);
  report = sc.handle({EventKind::PostEdit, {"orderUI.tsx"}, "s"});
  EXPECT_EQ(report.exit_code, 2);
  ASSERT_EQ(report.regressions.size(), 1u);
  EXPECT_EQ(report.regressions[0].previous, "pass");
  EXPECT_EQ(report.regressions[0].current, "fail");
  EXPECT_EQ(report.regressions[0].location.path, "orderUI.tsx");
}

TEST(Pipeline, SoftFailuresWarnOnly) {
  vgtest::TempDir dir;
  dir.copy_corpus("listing2");
  Sidecar sc(dir.path(), offline());
  auto report = sc.handle({EventKind::Manual, {}, "s"});
  ASSERT_EQ(report.proposed.size(), 1u);
  report = sc.decide(report.proposed[0].id, Status::Soft, "t");
  EXPECT_EQ(report.exit_code, 0);
  EXPECT_TRUE(report.failures.empty());
  ASSERT_EQ(report.soft_warnings.size(), 1u);
  EXPECT_EQ(report.soft_warnings[0].status, Status::Soft);
}

TEST(Pipeline, AutoApply) {
  vgtest::TempDir dir;
  dir.copy_corpus("listing1");
  Config c = offline();
  Sidecar first(dir.path(), c);
  auto report = first.handle({EventKind::Manual, {}, "s"});
  for (const auto& p : std::vector<ProposedItem>(report.proposed)) first.decide(p.id, Status::Accepted, "t");
  c.auto_apply = true;
  Sidecar sc(dir.path(), c);
  report = sc.handle({EventKind::Manual, {}, "s"});
  EXPECT_EQ(report.applied.size(), 2u);
  EXPECT_EQ(report.exit_code, 0);
}

TEST(Report, JsonShape) {
  vgtest::TempDir dir;
  dir.copy_corpus("listing1");
  Sidecar sc(dir.path(), offline());
  const auto j = report_to_json(sc.handle({EventKind::PreCommit, {}, "abc"}));
  for (const auto* key : {"schema_version", "snapshot", "event", "session", "proposed", "failures", "regressions",
                          "soft_warnings", "applied", "retired", "warnings", "passed", "exit_code"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["event"], "pre-commit");
  EXPECT_EQ(j["session"], "abc");
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["proposed"][0]["machine_actionable"], false);
  EXPECT_EQ(j["proposed"][0]["kind"], "exhaustive_switch");
}

TEST(State, RoundTrip) {
  vgtest::TempDir dir;
  EXPECT_EQ(load_state(dir.path()).snapshot_counter, 0u);
  PersistentState s;
  s.snapshot_counter = 41;
  s.last_outcomes = {{"00000000000000aa", "pass"}};
  save_state(dir.path(), s);
  const auto back = load_state(dir.path());
  EXPECT_EQ(back.snapshot_counter, 41u);
  EXPECT_EQ(back.last_outcomes, s.last_outcomes);
}

TEST(State, CounterSurvivesRestarts) {
  vgtest::TempDir dir;
  dir.copy_corpus("listing2");
  std::uint64_t last = 0;
  for (int i = 0; i < 3; ++i) {
    Sidecar sc(dir.path(), offline());
    const auto r = sc.handle({EventKind::Manual, {}, "s"});
    EXPECT_GT(r.snapshot, last);
    last = r.snapshot;
  }
}

TEST(Address, Parsing) {
  EXPECT_EQ(parse_address("127.0.0.1:7173"), (std::pair<std::string, int>{"127.0.0.1", 7173}));
  EXPECT_EQ(code_of([] { parse_address("localhost"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_address("h:99999"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_address(":80"); }), ErrorCode::InvalidArgument);
}

}  // namespace
