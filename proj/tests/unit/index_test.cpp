#include <gtest/gtest.h>

#include "test_support.hpp"
#include "vibeguard/error.hpp"
#include "vibeguard/index.hpp"

namespace {

using namespace vibeguard;
using index::DefaultKind;
using index::UnionKey;

using Members = std::vector<std::string>;

TEST(Index, OrderCorpusUnionsAndSwitches) {
  const auto idx = index::build_index(vgtest::read_corpus("listing1"));
  ASSERT_EQ(idx.unions().size(), 1u);
  const auto& u = idx.unions()[0];
  EXPECT_EQ(u.name, "OrderStatus");
  EXPECT_EQ(u.defining_file, "orderProcessor.ts");
  EXPECT_TRUE(u.exported);
  EXPECT_EQ(u.members, (Members{"pending", "paid", "shipped", "cancelled"}));

  ASSERT_EQ(idx.switch_sites().size(), 2u);
  const UnionKey key{"orderProcessor.ts", "OrderStatus"};
  const auto& a = idx.switch_sites()[0];
  EXPECT_EQ(a.file, "orderProcessor.ts");
  EXPECT_EQ(a.enclosing_decl, "processOrder");
  EXPECT_EQ(a.discriminant, "order.status");
  EXPECT_EQ(a.resolved_union, key);
  EXPECT_EQ(a.cases, (Members{"pending", "paid", "shipped"}));
  EXPECT_EQ(a.default_kind, DefaultKind::None);
  EXPECT_EQ(a.span.line, 13u);

  const auto& b = idx.switch_sites()[1];
  EXPECT_EQ(b.file, "orderUI.tsx");
  EXPECT_EQ(b.enclosing_decl, "OrderBadge");
  EXPECT_EQ(b.discriminant, "status");
  EXPECT_EQ(b.resolved_union, key);  // through the type-only import
  EXPECT_EQ(b.cases, (Members{"pending", "paid", "cancelled"}));

  const auto& imports = idx.import_graph();
  ASSERT_TRUE(imports.count("orderUI.tsx"));
  ASSERT_EQ(imports.at("orderUI.tsx").size(), 1u);
  EXPECT_EQ(imports.at("orderUI.tsx")[0].symbol, "OrderStatus");
  EXPECT_EQ(imports.at("orderUI.tsx")[0].source_file, "orderProcessor.ts");
}

TEST(Index, ReducerCorpusChain) {
  const auto idx = index::build_index(vgtest::read_corpus("listing2"));
  ASSERT_EQ(idx.comparison_chains().size(), 1u);
  const auto& c = idx.comparison_chains()[0];
  EXPECT_EQ(c.subject, "action.type");
  EXPECT_EQ(c.observed_values, (Members{"ADD_TODO", "REMOVE_TODO", "TOGGLE_TODO"}));
  EXPECT_EQ(c.arms.size(), 3u);
  EXPECT_EQ(c.subject_type, index::SubjectType::String);
  ASSERT_TRUE(c.subject_decl);
  EXPECT_EQ(c.subject_decl->container, "Action");
  EXPECT_EQ(c.subject_decl->property, "type");
  EXPECT_FALSE(c.has_negated);
  EXPECT_FALSE(c.has_terminal_else);
  EXPECT_EQ(c.enclosing_decl, "reducer");
}

TEST(Index, MessageTypeFamily) {
  const auto idx = index::build_index(vgtest::read_corpus("message-type"));
  ASSERT_EQ(idx.literal_families().size(), 1u);
  const auto& f = idx.literal_families()[0];
  EXPECT_EQ(f.callee, "processMessage");
  EXPECT_EQ(f.arg_index, 0u);
  EXPECT_EQ(f.param_name, "type");
  EXPECT_EQ(f.literals, (Members{"info", "warning", "error"}));
  EXPECT_EQ(f.sites.size(), 3u);
  ASSERT_EQ(f.annotation_sites.size(), 1u);
  EXPECT_EQ(f.annotation_sites[0].file, "messages.ts");
  EXPECT_EQ(f.annotation_sites[0].decl, "processMessage");
  EXPECT_EQ(f.annotation_sites[0].name, "type");
}

TEST(Index, FamilyThresholdsAreConfigurable) {
  const auto files = vgtest::read_corpus("message-type");
  index::IndexOptions o;
  o.family_min_size = 4;
  EXPECT_TRUE(index::build_index(files, o).literal_families().empty());
  o.family_min_size = 3;
  o.family_min_sites = 4;
  EXPECT_TRUE(index::build_index(files, o).literal_families().empty());
}

TEST(Index, HttpMethodsMapping) {
  const auto idx = index::build_index(vgtest::read_corpus("http-methods"));
  ASSERT_EQ(idx.mapping_literals().size(), 1u);
  const auto& m = idx.mapping_literals()[0];
  EXPECT_EQ(m.decl_name, "handlers");
  EXPECT_EQ(m.keys, (Members{"GET", "POST", "PUT", "DELETE"}));
  EXPECT_EQ(m.intended_key_union, (UnionKey{"routes.ts", "HttpMethod"}));
  EXPECT_TRUE(m.explicit_annotation);
  EXPECT_FALSE(m.has_satisfies_guard);
  EXPECT_EQ(m.value_type_text, "Handler");
}

TEST(Index, UnresolvableNamesLeaveUnionEmpty) {
  const auto idx = index::build_index({{"a.ts", "import type { Nope } from './missing';\n"
                                                "export function f(x: Nope) { switch (x) { case 'a': return 1; } }\n"}});
  ASSERT_EQ(idx.switch_sites().size(), 1u);
  EXPECT_FALSE(idx.switch_sites()[0].resolved_union);
  EXPECT_FALSE(index::resolve_union(idx, "Nope", "a.ts"));
}

TEST(Index, UpdateRelinksDependents) {
  auto files = vgtest::read_corpus("listing1");
  const auto idx = index::build_index(files);
  std::string text = files.at("orderProcessor.ts");
  const auto at = text.find("'cancelled'");
  text.insert(at + 11, " | 'refunded'");
  const auto next = index::update_index(idx, {{"orderProcessor.ts", text}});
  EXPECT_EQ(next.stats().reparsed, 1u);
  EXPECT_GE(next.stats().relinked, 2u);
  files["orderProcessor.ts"] = text;
  EXPECT_TRUE(next == index::build_index(files));
  EXPECT_EQ(next.unions()[0].members.back(), "refunded");
  // The old snapshot is untouched.
  EXPECT_EQ(idx.unions()[0].members.size(), 4u);
}

TEST(Index, DeletingTheDefiningFileUnresolves) {
  const auto idx = index::build_index(vgtest::read_corpus("listing1"));
  const auto next = index::update_index(idx, {{"orderProcessor.ts", std::nullopt}});
  EXPECT_FALSE(next.contains("orderProcessor.ts"));
  ASSERT_EQ(next.switch_sites().size(), 1u);
  EXPECT_FALSE(next.switch_sites()[0].resolved_union);
}

TEST(Index, FindSlot) {
  const auto idx = index::build_index(vgtest::read_corpus("listing2"));
  const auto slot = idx.find_slot("reducer.ts", "Action", "type");
  ASSERT_TRUE(slot);
  EXPECT_EQ(slot->type_text, "string");
  EXPECT_FALSE(idx.find_slot("reducer.ts", "Action", "nope"));
  const auto param = idx.find_slot("reducer.ts", "reducer", "action");
  ASSERT_TRUE(param);
  EXPECT_EQ(param->type_text, "Action");
}

TEST(Index, TopLevelNames) {
  const auto idx = index::build_index(vgtest::read_corpus("listing1"));
  auto names = idx.top_level_names("orderUI.tsx");
  std::sort(names.begin(), names.end());
  EXPECT_EQ(names, (Members{"Badge", "OrderBadge", "OrderStatus", "updateOrderUI"}));
}

TEST(Index, InvalidFilesAreRecordedNotFatal) {
  const auto idx = index::build_index({{"bad.ts", "let x = '\xff';"}, {"ok.ts", "export type T = 'a';\n"}});
  EXPECT_TRUE(idx.failure("bad.ts"));
  EXPECT_FALSE(idx.failure("ok.ts"));
  EXPECT_EQ(idx.unions().size(), 1u);
}

TEST(Index, NormalizePath) {
  EXPECT_EQ(index::normalize_path("a/./b/../c"), "a/c");
  EXPECT_EQ(index::normalize_path("./x.ts"), "x.ts");
  EXPECT_EQ(index::normalize_path("a//b"), "a/b");
  EXPECT_EQ(index::normalize_path("../a"), "../a");
}

TEST(Index, ReadSourceTreeSkipsIgnoredDirectories) {
  vgtest::TempDir dir;
  dir.write("src/a.ts", "export type A = 'x';\n");
  dir.write("src/b.tsx", "export const b = 1;\n");
  dir.write("src/readme.md", "no\n");
  dir.write("node_modules/dep/index.ts", "export type D = 'd';\n");
  dir.write(".vibeguard/x.ts", "export type V = 'v';\n");
  const auto files = index::read_source_tree(dir.path().string());
  std::vector<std::string> paths;
  for (const auto& [p, _] : files) paths.push_back(p);
  EXPECT_EQ(paths, (Members{"src/a.ts", "src/b.tsx"}));
  try {
    index::read_source_tree((dir.path() / "missing").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WorkspaceUnreadable);
  }
}

TEST(Index, IndexIsAPureFunctionOfTheFileSet) {
  vgtest::Gen g(vgtest::seed_or(42));
  for (int i = 0; i < 20; ++i) {
    const auto files = vgtest::gen_workspace(g, {});
    EXPECT_TRUE(index::build_index(files) == index::build_index(files));
  }
}

}  // namespace
