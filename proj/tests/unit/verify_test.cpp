#include <gtest/gtest.h>

#include <set>

#include "test_support.hpp"
#include "vibeguard/detect.hpp"
#include "vibeguard/error.hpp"
#include "vibeguard/fix.hpp"
#include "vibeguard/verify.hpp"

namespace {

using namespace vibeguard;
using verify::Outcome;
using Members = std::vector<std::string>;

store::SpecStore proposals(const index::CodebaseIndex& idx) {
  detect::ProposeOptions o;
  o.now = "2026-01-01T00:00:00Z";
  return store::upsert({}, detect::propose_specs(idx, detect::detect_all(idx), o).records);
}

store::SpecStore with_status(store::SpecStore st, Status s) {
  for (const auto& r : std::vector<SpecRecord>(st.records())) st = store::set_status(st, r.id, s, "t", "x");
  return st;
}

// The listing1 corpus with both planned fixes applied in memory.
std::map<std::string, std::string> listing1_fixed(store::SpecStore* out_store = nullptr) {
  auto files = vgtest::read_corpus("listing1");
  fix::MemoryWorkspace ws(files);
  auto idx = index::build_index(files);
  const auto st = with_status(proposals(idx), Status::Accepted);
  for (const auto& r : st.records()) {
    const auto v = verify::check_spec(idx, r);
    idx = fix::apply_fix(ws, idx, fix::plan_fix(idx, r, v), st).index;
  }
  if (out_store) *out_store = st;
  return ws.files();
}

TEST(Verify, OrderCorpusFailsTierOne) {
  const auto idx = index::build_index(vgtest::read_corpus("listing1"));
  const auto st = with_status(proposals(idx), Status::Accepted);
  const auto a = verify::check_spec(idx, st.records()[0]);
  EXPECT_EQ(a.outcome, Outcome::Fail);
  EXPECT_EQ(a.tier, verify::Tier::Syntactic);
  EXPECT_EQ(a.missing_members, Members{"cancelled"});
  ASSERT_FALSE(a.diagnostics.empty());
  EXPECT_EQ(a.diagnostics[0].severity, verify::Severity::Error);
  EXPECT_EQ(a.diagnostics[0].path, "orderProcessor.ts");
  EXPECT_EQ(a.diagnostics[0].span.line, 13u);
  EXPECT_FALSE(a.needs_compile);
}

TEST(Verify, SoftRecordsOnlyWarn) {
  const auto idx = index::build_index(vgtest::read_corpus("listing1"));
  const auto st = with_status(proposals(idx), Status::Soft);
  const auto rep = verify::verify_all(idx, st);
  EXPECT_EQ(rep.failed, 2u);
  EXPECT_EQ(rep.hard_failures, 0u);
  for (const auto& v : rep.verdicts)
    for (const auto& d : v.diagnostics) EXPECT_EQ(d.severity, verify::Severity::Warning);
}

TEST(Verify, HardVerdictsComeFirst) {
  const auto idx = index::build_index(vgtest::read_corpus("listing1"));
  auto st = proposals(idx);
  st = store::set_status(st, st.records()[0].id, Status::Soft, "t");
  st = store::set_status(st, st.records()[1].id, Status::Accepted, "t");
  const auto rep = verify::verify_all(idx, st);
  ASSERT_EQ(rep.verdicts.size(), 2u);
  EXPECT_EQ(rep.verdicts[0].record_id, st.records()[1].id);
  EXPECT_EQ(rep.hard_failures, 1u);
}

TEST(Verify, ProposedAndRejectedRecordsAreSkipped) {
  const auto idx = index::build_index(vgtest::read_corpus("listing1"));
  const auto rep = verify::verify_all(idx, proposals(idx));
  EXPECT_TRUE(rep.verdicts.empty());
}

TEST(Verify, AssertNeverDefaultNeedsCompile) {
  store::SpecStore st;
  const auto files = listing1_fixed(&st);
  const auto idx = index::build_index(files);
  for (const auto& r : st.records()) {
    const auto v = verify::check_spec(idx, r);
    EXPECT_EQ(v.syntactic_outcome, Outcome::Pass) << r.anchor.decl;
    // OrderBadge now lists every member; processOrder passes only through the guard.
    EXPECT_EQ(v.needs_compile, r.anchor.decl == "processOrder") << r.anchor.decl;
  }
  const auto rep = verify::verify_all(idx, st);
  ASSERT_EQ(rep.warnings.size(), 1u);
  EXPECT_NE(rep.warnings[0].find("no oracle"), std::string::npos);
}

TEST(Verify, MiniCheckerMatchesRecordedCompilerOutput) {
  store::SpecStore st;
  const auto idx = index::build_index(listing1_fixed(&st));
  const auto result = verify::MiniChecker::check(idx);
  EXPECT_NE(result.exit_status, 0);
  ASSERT_EQ(result.diagnostics.size(), 1u);
  // Recorded from tsc on the same files.
  EXPECT_EQ(verify::format_diagnostic(result.diagnostics[0]),
            "orderProcessor.ts(19,33): error TS2345: Argument of type '\"cancelled\"' is not assignable to "
            "parameter of type 'never'.");
}

TEST(Verify, CompileTierMapsToTheInnermostScope) {
  store::SpecStore st;
  const auto files = listing1_fixed(&st);
  const auto idx = index::build_index(files);
  vgtest::TempDir dir;
  dir.populate(files);
  verify::MiniChecker oracle;
  verify::VerifyOptions o;
  o.oracle = &oracle;
  o.workspace = dir.path();
  const auto rep = verify::verify_all(idx, st, o);
  EXPECT_EQ(rep.oracle_invocations, 1u);
  ASSERT_EQ(rep.verdicts.size(), 2u);
  std::map<std::string, const verify::Verdict*> by_decl;
  for (const auto& v : rep.verdicts) by_decl[st.find(v.record_id)->anchor.decl] = &v;
  EXPECT_EQ(by_decl["processOrder"]->outcome, Outcome::Fail);
  EXPECT_EQ(by_decl["processOrder"]->tier, verify::Tier::Compile);
  EXPECT_EQ(by_decl["processOrder"]->missing_members, Members{"cancelled"});
  ASSERT_EQ(by_decl["processOrder"]->diagnostics.size(), 1u);
  EXPECT_EQ(by_decl["processOrder"]->diagnostics[0].span.line, 19u);
  EXPECT_EQ(by_decl["OrderBadge"]->outcome, Outcome::Pass);
  EXPECT_EQ(rep.hard_failures, 1u);
  // The oracle left the workspace alone.
  for (const auto& [p, t] : files) EXPECT_EQ(dir.read(p), t);
}

TEST(Verify, ZeroBudgetSkipsTheOracle) {
  store::SpecStore st;
  const auto files = listing1_fixed(&st);
  const auto idx = index::build_index(files);
  verify::MiniChecker oracle;
  verify::VerifyOptions o;
  o.oracle = &oracle;
  o.budget = std::chrono::milliseconds(0);
  const auto rep = verify::verify_all(idx, st, o);
  EXPECT_EQ(rep.oracle_invocations, 0u);
  EXPECT_EQ(rep.budget_exceeded, 1u);
  for (const auto& v : rep.verdicts)
    EXPECT_EQ(v.outcome, st.find(v.record_id)->anchor.decl == "processOrder" ? Outcome::BudgetExceeded : Outcome::Pass);
}

TEST(Verify, NotApplicableWhenTheAnchorIsGone) {
  auto files = vgtest::read_corpus("listing1");
  const auto idx = index::build_index(files);
  const auto st = with_status(proposals(idx), Status::Accepted);
  files.erase("orderUI.tsx");
  const auto gone = index::build_index(files);
  const SpecRecord* badge = nullptr;
  for (const auto& r : st.records())
    if (r.anchor.decl == "OrderBadge") badge = &r;
  ASSERT_NE(badge, nullptr);
  EXPECT_EQ(verify::check_spec(gone, *badge).outcome, Outcome::NotApplicable);
  EXPECT_FALSE(verify::anchor_resolves(gone, *badge));
}

TEST(Verify, AnchorsFollowCodeMotion) {
  auto files = vgtest::read_corpus("listing1");
  const auto idx = index::build_index(files);
  const auto st = with_status(proposals(idx), Status::Accepted);
  files["orderUI.tsx"] = "// header\n// header\n" + files["orderUI.tsx"];
  const auto moved = index::build_index(files);
  for (const auto& r : st.records()) {
    const auto scope = verify::resolve_anchor(moved, r);
    ASSERT_TRUE(scope);
    EXPECT_EQ(verify::check_spec(moved, r).outcome, Outcome::Fail);
  }
}

TEST(Verify, DiagnosticParsing) {
  const auto diags = verify::parse_diagnostics(
      "a.ts(3,5): error TS2345: Argument of type '\"x\"' is not assignable.\n"
      "  Extra detail line.\n"
      "src/b.tsx(10,1): warning TS6133: 'y' is declared but never used.\n"
      "Found 2 errors.\n");
  ASSERT_EQ(diags.size(), 2u);
  EXPECT_EQ(diags[0].file, "a.ts");
  EXPECT_EQ(diags[0].line, 3u);
  EXPECT_EQ(diags[0].col, 5u);
  EXPECT_EQ(diags[0].code, "TS2345");
  EXPECT_NE(diags[0].message.find("Extra detail line."), std::string::npos);
  EXPECT_EQ(diags[1].severity, "warning");
  EXPECT_EQ(verify::parse_diagnostics(verify::format_diagnostic(diags[1]))[0], diags[1]);
}

TEST(Verify, MiniCheckerCoversLabelsAndRecordKeys) {
  const auto idx = index::build_index(
      {{"a.ts", "export type K = 'a' | 'b';\n"
                "export function f(x: K) { switch (x) { case 'a': return 1; case 'zz': return 2; } }\n"
                "export const t: Record<K, number> = { a: 1 };\n"}});
  const auto result = verify::MiniChecker::check(idx);
  std::set<std::string> codes;
  for (const auto& d : result.diagnostics) codes.insert(d.code);
  EXPECT_TRUE(codes.count("TS2678"));
  EXPECT_TRUE(codes.count("TS2741"));
}

TEST(Verify, CommandOracle) {
  vgtest::TempDir dir;
  dir.write("a.ts", "export const x = 1;\n");
  {
    verify::CommandOracle ok("true");
    EXPECT_EQ(ok.run(dir.path()).exit_status, 0);
  }
  {
    verify::CommandOracle out("printf 'a.ts(1,14): error TS2322: Bad.\\n'; exit 2");
    const auto r = out.run(dir.path());
    EXPECT_EQ(r.exit_status, 2);
    ASSERT_EQ(r.diagnostics.size(), 1u);
    EXPECT_EQ(r.diagnostics[0].code, "TS2322");
  }
  try {
    verify::CommandOracle("definitely-not-a-command-vg").run(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OracleUnavailable);
  }
  try {
    verify::CommandOracle("sleep 5", std::chrono::milliseconds(200)).run(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OracleTimeout);
  }
  EXPECT_EQ(dir.read("a.ts"), "export const x = 1;\n");
}

TEST(Verify, UnionAliasFailsWhileLiteralsStayOutside) {
  auto files = vgtest::read_corpus("message-type");
  files.erase("tsconfig.json");
  auto idx = index::build_index(files);
  const auto r = detect::propose_specs(idx, detect::detect_union_alias(idx)).records.at(0);
  ASSERT_EQ(r.predicate.members, (std::vector<std::string>{"info", "warning", "error"}));
  fix::MemoryWorkspace ws(files);
  idx = fix::apply_fix(ws, idx, fix::plan_fix(idx, r, verify::check_spec(idx, r)), store::SpecStore({r})).index;
  EXPECT_EQ(verify::check_spec(idx, r).outcome, Outcome::Pass);

  // Three new literals outside MessageType reopen the family.
  auto grown = ws.files();
  grown["extra.ts"] = "import { processMessage } from './messages';\n"
                      "processMessage('debug', 'x');\nprocessMessage('trace', 'y');\nprocessMessage('fatal', 'z');\n";
  const auto v = verify::check_spec(index::build_index(grown), r);
  EXPECT_EQ(v.outcome, Outcome::Fail);
}

}  // namespace
