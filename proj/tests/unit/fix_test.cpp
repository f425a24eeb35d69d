#include <gtest/gtest.h>

#include <sstream>

#include "test_support.hpp"
#include "vibeguard/detect.hpp"
#include "vibeguard/error.hpp"
#include "vibeguard/fix.hpp"
#include "vibeguard/util.hpp"
#include "vibeguard/verify.hpp"

namespace {

using namespace vibeguard;
using fix::TextEdit;

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

struct Fixture {
  std::map<std::string, std::string> files;
  index::CodebaseIndex idx;
  store::SpecStore st;

  explicit Fixture(const std::string& corpus) : files(vgtest::read_corpus(corpus)), idx(index::build_index(files)) {
    detect::ProposeOptions o;
    o.now = "2026-01-01T00:00:00Z";
    st = store::upsert({}, detect::propose_specs(idx, detect::detect_all(idx), o).records);
    for (const auto& r : std::vector<SpecRecord>(st.records()))
      st = store::set_status(st, r.id, Status::Accepted, "t", "x");
  }
  const SpecRecord& record(const std::string& decl) const {
    for (const auto& r : st.records())
      if (r.anchor.decl == decl) return r;
    throw std::runtime_error("no record for " + decl);
  }
  fix::FixPlan plan(const SpecRecord& r) const { return fix::plan_fix(idx, r, verify::check_spec(idx, r)); }
};

// ---- edits ----------------------------------------------------------------------

TEST(ApplyEdits, OrderAndInsertions) {
  EXPECT_EQ(fix::apply_edits("abcdef", {{"f", 1, 3, "X"}, {"f", 4, 4, "Y"}}), "aXdYef");
  EXPECT_EQ(fix::apply_edits("abc", {{"f", 1, 1, "1"}, {"f", 1, 1, "2"}}), "a12bc");
  EXPECT_EQ(fix::apply_edits("abc", {{"f", 1, 2, "R"}, {"f", 1, 1, "I"}}), "aIRc");
  EXPECT_EQ(fix::apply_edits("abc", {{"f", 1, 2, "R"}, {"f", 2, 2, "I"}}), "aRIc");
  EXPECT_EQ(fix::apply_edits("abc", {{"f", 3, 3, "!"}}), "abc!");
  EXPECT_EQ(fix::apply_edits("abc", {}), "abc");
  EXPECT_EQ(code_of([] { fix::apply_edits("abc", {{"f", 0, 2, "x"}, {"f", 1, 3, "y"}}); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { fix::apply_edits("abc", {{"f", 2, 9, "x"}}); }), ErrorCode::SpanOutOfBounds);
  EXPECT_EQ(code_of([] { fix::apply_edits("abc", {{"f", 2, 1, "x"}}); }), ErrorCode::SpanOutOfBounds);
}

// Applies a unified diff produced by unified_diff; the reference for the
// diff property below.
std::string patch(const std::string& before, const std::string& diff) {
  std::vector<std::string> old_lines;
  {
    std::size_t pos = 0;
    while (pos < before.size()) {
      auto nl = before.find('\n', pos);
      old_lines.push_back(before.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos + 1));
      pos = nl == std::string::npos ? before.size() : nl + 1;
    }
  }
  std::vector<std::string> diff_lines;
  {
    std::istringstream in(diff);
    for (std::string l; std::getline(in, l);) diff_lines.push_back(l);
  }
  std::string out;
  std::size_t next_old = 0;  // index into old_lines
  for (std::size_t i = 0; i < diff_lines.size(); ++i) {
    const auto& l = diff_lines[i];
    if (!l.starts_with("@@")) continue;
    int a = 0, b = 0, c = 0, d = 0;
    if (std::sscanf(l.c_str(), "@@ -%d,%d +%d,%d @@", &a, &b, &c, &d) != 4) {
      b = 1;
      std::sscanf(l.c_str(), "@@ -%d", &a);
    }
    const std::size_t start = b == 0 ? static_cast<std::size_t>(a) : static_cast<std::size_t>(a - 1);
    while (next_old < start) out += old_lines[next_old++];
    for (++i; i < diff_lines.size() && !diff_lines[i].starts_with("@@"); ++i) {
      const auto& h = diff_lines[i];
      const bool no_nl = i + 1 < diff_lines.size() && diff_lines[i + 1].starts_with("\\ No newline");
      const std::string body = h.substr(1) + (no_nl ? "" : "\n");
      if (h[0] == ' ') {
        out += body;
        ++next_old;
      } else if (h[0] == '-') {
        ++next_old;
      } else if (h[0] == '+') {
        out += body;
      }
      if (no_nl) ++i;
    }
    --i;
  }
  while (next_old < old_lines.size()) out += old_lines[next_old++];
  return out;
}

TEST(Diff, Format) {
  const auto d = fix::unified_diff("a/x.ts", "b/x.ts", "one\ntwo\nthree\n", "one\n2\nthree\n");
  EXPECT_EQ(d, "--- a/x.ts\n+++ b/x.ts\n@@ -1,3 +1,3 @@\n one\n-two\n+2\n three\n");
  EXPECT_EQ(fix::unified_diff("a", "b", "same\n", "same\n"), "");
  const auto nonl = fix::unified_diff("a", "b", "x", "y");
  EXPECT_NE(nonl.find("\\ No newline at end of file"), std::string::npos);
}

TEST(Diff, PatchReproducesTheTarget) {
  vgtest::Gen g(vgtest::seed_or(0xd1ff));
  const std::vector<std::string> alphabet = {"a", "b", "c", "case 'x':", "}", ""};
  for (int i = 0; i < 400; ++i) {
    auto make = [&] {
      std::string s;
      for (std::size_t n = g.below(25); n > 0; --n) s += g.pick(alphabet) + "\n";
      if (!s.empty() && g.chance(0.2)) s.pop_back();
      return s;
    };
    const std::string before = make();
    std::string after = before;
    if (g.chance(0.5)) after = make();
    else if (!after.empty()) after.insert(g.below(after.size()), g.pick(alphabet) + "\n");
    const auto diff = fix::unified_diff("a", "b", before, after, static_cast<int>(g.below(4)));
    if (before == after) {
      EXPECT_TRUE(diff.empty());
      continue;
    }
    ASSERT_EQ(patch(before, diff), after) << "before:\n" << before << "\nafter:\n" << after << "\ndiff:\n" << diff;
  }
}

TEST(RelativeModule, Paths) {
  EXPECT_EQ(fix::relative_module("a.ts", "assertNever.ts"), "./assertNever");
  EXPECT_EQ(fix::relative_module("src/a.ts", "src/b.tsx"), "./b");
  EXPECT_EQ(fix::relative_module("src/sub/a.ts", "src/b.ts"), "../b");
  EXPECT_EQ(fix::relative_module("a.ts", "lib/x/y.ts"), "./lib/x/y");
  EXPECT_EQ(fix::relative_module("p/q/a.ts", "r/b.ts"), "../../r/b");
}

// ---- plans on the corpora -----------------------------------------------------

TEST(PlanFix, ProcessOrderGetsTheGuardOnly) {
  Fixture f("listing1");
  const auto plan = f.plan(f.record("processOrder"));
  ASSERT_EQ(plan.creates_files.size(), 1u);
  EXPECT_EQ(plan.creates_files.at("assertNever.ts"), fix::kAssertNeverSource);
  const auto after = fix::preview(f.idx, plan).at("orderProcessor.ts");
  EXPECT_NE(after.find("import { assertNever } from './assertNever';"), std::string::npos);
  EXPECT_NE(after.find(std::string(fix::kGuardComment) + "\n    default: return assertNever(order.status);"),
            std::string::npos);
  EXPECT_EQ(after.find("case 'cancelled'"), std::string::npos);
  ASSERT_FALSE(plan.review_notes.empty());
  EXPECT_NE(plan.review_notes[0].find("'cancelled'"), std::string::npos);
  EXPECT_EQ(plan.file_hashes.at("orderProcessor.ts"), sha256_hex(f.files.at("orderProcessor.ts")));
}

TEST(PlanFix, OrderBadgeGetsTheShippedCase) {
  Fixture f("listing1");
  const auto plan = f.plan(f.record("OrderBadge"));
  const auto after = fix::preview(f.idx, plan).at("orderUI.tsx");
  const auto cancelled = after.find("case 'cancelled'");
  const auto shipped = after.find("case 'shipped': return <Badge color=\"TODO\">Shipped</Badge>;");
  ASSERT_NE(shipped, std::string::npos) << after;
  EXPECT_GT(shipped, cancelled);
  EXPECT_NE(after.find("default: return assertNever(status);"), std::string::npos);
  EXPECT_NE(after.find("import { assertNever } from './assertNever';"), std::string::npos);
  bool placeholder_note = false;
  for (const auto& n : plan.review_notes) placeholder_note |= n.find("TODO") != std::string::npos;
  EXPECT_TRUE(placeholder_note);
}

TEST(PlanFix, EditsAreSortedAndDisjoint) {
  for (const auto* corpus : {"listing1", "listing2", "message-type", "http-methods"}) {
    Fixture f(corpus);
    for (const auto& r : f.st.records()) {
      const auto plan = f.plan(r);
      for (std::size_t i = 1; i < plan.edits.size(); ++i) {
        const auto& a = plan.edits[i - 1];
        const auto& b = plan.edits[i];
        if (a.path != b.path) continue;
        EXPECT_GE(a.start, b.end) << corpus;
      }
    }
  }
}

TEST(PlanFix, ReducerCorpusRewrite) {
  Fixture f("listing2");
  ASSERT_EQ(f.st.size(), 1u);
  const auto plan = f.plan(f.st.records()[0]);
  const auto after = fix::preview(f.idx, plan).at("reducer.ts");
  EXPECT_NE(after.find("type ActionType = 'ADD_TODO' | 'REMOVE_TODO' | 'TOGGLE_TODO';"), std::string::npos) << after;
  EXPECT_NE(after.find("type: ActionType;"), std::string::npos);
  EXPECT_NE(after.find("switch (action.type)"), std::string::npos);
  EXPECT_NE(after.find("default: return assertNever(action.type);"), std::string::npos);
  EXPECT_EQ(after.find("else if"), std::string::npos);
}

TEST(PlanFix, MessageTypeAlias) {
  Fixture f("message-type");
  const auto plan = f.plan(f.st.records()[0]);
  const auto after = fix::preview(f.idx, plan);
  EXPECT_NE(after.at("messages.ts").find("export type MessageType = 'info' | 'warning' | 'error';"),
            std::string::npos);
  EXPECT_NE(after.at("messages.ts").find("processMessage(type: MessageType"), std::string::npos);
}

TEST(PlanFix, HttpMethodsGuard) {
  Fixture f("http-methods");
  const auto plan = f.plan(f.st.records()[0]);
  const auto after = fix::preview(f.idx, plan).at("routes.ts");
  EXPECT_NE(after.find("} satisfies Record<HttpMethod, Handler>;"), std::string::npos) << after;
}

TEST(PlanFix, RejectsPassingVerdicts) {
  Fixture f("listing1");
  const auto& r = f.record("OrderBadge");
  auto v = verify::check_spec(f.idx, r);
  v.outcome = verify::Outcome::Pass;
  EXPECT_EQ(code_of([&] { fix::plan_fix(f.idx, r, v); }), ErrorCode::InvalidArgument);
}

TEST(PlanFix, NegatedChainsAreAmbiguous) {
  const auto idx = index::build_index(
      {{"r.ts", "interface Act { type: string; }\n"
                "function r(action: Act) {\n"
                "  if (action.type !== 'A') { return 1; } else if (action.type === 'B') { return 2; }\n"
                "  return 0;\n}\n"}});
  const auto scopes = detect::detect_discriminated_union(idx);
  ASSERT_EQ(scopes.size(), 1u);
  const auto r = detect::propose_specs(idx, scopes).records.at(0);
  EXPECT_EQ(code_of([&] { fix::plan_fix(idx, r, verify::check_spec(idx, r)); }), ErrorCode::AmbiguousFix);
}

// Plans for the single exhaustive_switch scope of `source`.
fix::FixPlan plan_single_switch(const index::CodebaseIndex& idx) {
  const auto scopes = detect::detect_exhaustive_switch(idx);
  EXPECT_EQ(scopes.size(), 1u);
  const auto r = detect::propose_specs(idx, scopes).records.at(0);
  return fix::plan_fix(idx, r, verify::check_spec(idx, r));
}

TEST(PlanFix, StrayLabelsBlockCaseCompletion) {
  const auto idx = index::build_index(
      {{"a.ts", "type K = 'a' | 'b';\nfunction log(s: string) { return s; }\n"
                "function f(x: K) {\n  switch (x) {\n    case 'a': return log('a');\n    case 'z': return log('z');\n"
                "    default: return log('other');\n  }\n}\n"}});
  EXPECT_EQ(code_of([&] { plan_single_switch(idx); }), ErrorCode::AmbiguousFix);
}

TEST(PlanFix, StubsRespectTypedParameters) {
  const std::string src =
      "type K = 'a' | 'b' | 'c';\ntype Shown = 'a' | 'b';\nfunction show(s: Shown) { return s; }\n"
      "function f(x: K) {\n  switch (x) {\n    case 'a': return show('a');\n    case 'b': return show('b');\n  }\n}\n";
  const auto idx = index::build_index({{"a.ts", src}});
  ASSERT_EQ(index::parameter_literals(idx, "a.ts", "show", 0), (std::vector<std::string>{"a", "b"}));
  const auto plan = plan_single_switch(idx);
  const auto after = fix::preview(idx, plan).at("a.ts");
  EXPECT_EQ(after.find("show('c')"), std::string::npos) << after;
  EXPECT_NE(after.find("default: return assertNever(x);"), std::string::npos);
  ASSERT_FALSE(plan.review_notes.empty());
  EXPECT_NE(plan.review_notes.back().find("not accepted by show()"), std::string::npos);

  // Unconstrained parameter: the stub is synthesized.
  auto open = src;
  open.replace(open.find("s: Shown"), 8, "s: string");
  const auto idx2 = index::build_index({{"a.ts", open}});
  EXPECT_EQ(index::parameter_literals(idx2, "a.ts", "show", 0), std::nullopt);
  EXPECT_NE(fix::preview(idx2, plan_single_switch(idx2)).at("a.ts").find("case 'c': return show('c');"),
            std::string::npos);
}

TEST(PlanFix, StubsDoNotGrowOpenStringFamilies) {
  // emit() already receives three unformalized literals.
  const auto idx = index::build_index(
      {{"a.ts", "type K = 'a' | 'b' | 'c' | 'd';\nfunction emit(s: string) { return s; }\n"
                "function f(x: K) {\n  switch (x) {\n    case 'a': return emit('a');\n    case 'b': return emit('b');\n"
                "    case 'c': return emit('c');\n  }\n}\n"}});
  ASSERT_EQ(idx.literal_families().size(), 1u);
  const auto after = fix::preview(idx, plan_single_switch(idx)).at("a.ts");
  EXPECT_EQ(after.find("emit('d')"), std::string::npos) << after;
  EXPECT_NE(after.find("assertNever(x)"), std::string::npos);
}

TEST(PlanFix, GoneAnchorIsUnfixable) {
  Fixture f("listing1");
  const auto& r = f.record("OrderBadge");
  const auto v = verify::check_spec(f.idx, r);
  auto files = f.files;
  files.erase("orderUI.tsx");
  EXPECT_EQ(code_of([&] { fix::plan_fix(index::build_index(files), r, v); }), ErrorCode::UnfixableScope);
}

// ---- apply ------------------------------------------------------------------------

TEST(ApplyFix, WritesThroughADirectoryWorkspace) {
  Fixture f("listing1");
  vgtest::TempDir dir;
  dir.populate(f.files);
  fix::DirectoryWorkspace ws(dir.path());
  const auto plan = f.plan(f.record("processOrder"));
  const auto result = fix::apply_fix(ws, f.idx, plan, f.st);
  EXPECT_EQ(result.touched, (std::vector<std::string>{"assertNever.ts", "orderProcessor.ts"}));
  ASSERT_TRUE(result.origin);
  EXPECT_EQ(result.origin->syntactic_outcome, verify::Outcome::Pass);
  EXPECT_EQ(dir.read("assertNever.ts"), fix::kAssertNeverSource);
  EXPECT_EQ(dir.read("orderProcessor.ts"), fix::preview(f.idx, plan).at("orderProcessor.ts"));
}

TEST(ApplyFix, StaleFilesAreRefused) {
  Fixture f("listing1");
  fix::MemoryWorkspace ws(f.files);
  ws.write("orderUI.tsx", f.files.at("orderUI.tsx") + "\n");
  const auto before = ws.files();
  try {
    fix::apply_fix(ws, f.idx, f.plan(f.record("OrderBadge")), f.st);
    FAIL();
  } catch (const fix::FixError& e) {
    EXPECT_EQ(e.code(), ErrorCode::StaleSnapshot);
  }
  EXPECT_EQ(ws.files(), before);
}

TEST(ApplyFix, ExistingHelperIsNotRecreated) {
  Fixture f("listing1");
  fix::MemoryWorkspace ws(f.files);
  auto idx = fix::apply_fix(ws, f.idx, f.plan(f.record("processOrder")), f.st).index;
  const auto& r = f.record("OrderBadge");
  const auto plan = fix::plan_fix(idx, r, verify::check_spec(idx, r));
  EXPECT_TRUE(plan.creates_files.empty());
  fix::apply_fix(ws, idx, plan, f.st);
  EXPECT_EQ(ws.files().at("assertNever.ts"), fix::kAssertNeverSource);
}

TEST(ApplyFix, WriteFailureRollsBack) {
  Fixture f("listing1");
  fix::MemoryWorkspace ws(f.files);
  ws.fail_after_writes(1);
  try {
    fix::apply_fix(ws, f.idx, f.plan(f.record("processOrder")), f.st);
    FAIL();
  } catch (const fix::FixError& e) {
    EXPECT_EQ(e.code(), ErrorCode::StorageFailure);
  }
  EXPECT_EQ(ws.files(), f.files);
}

TEST(ApplyFix, ParseRegressionRollsBack) {
  Fixture f("listing1");
  fix::MemoryWorkspace ws(f.files);
  const auto plan = f.plan(f.record("OrderBadge"));
  ws.corrupt_on_write("orderUI.tsx", fix::preview(f.idx, plan).at("orderUI.tsx") + "\n}}}\n");
  try {
    fix::apply_fix(ws, f.idx, plan, f.st);
    FAIL();
  } catch (const fix::FixError& e) {
    EXPECT_EQ(e.code(), ErrorCode::PostEditParseFailure);
  }
  EXPECT_EQ(ws.files(), f.files);
}

}  // namespace
