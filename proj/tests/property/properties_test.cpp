#include <gtest/gtest.h>

#include "properties.hpp"
#include "test_support.hpp"

namespace {

using namespace vgtest;

void expect_ok(const PropertyResult& r) {
  EXPECT_GE(r.cases, kPropertyCases);
  EXPECT_EQ(r.failures, 0u) << r.summary();
  for (const auto& c : r.counterexamples) ADD_FAILURE() << c;
  std::cout << "  " << r.summary() << "\n";
}

TEST(Property, IncrementalIndexMatchesFullBuild) { expect_ok(incremental_index_property(seed_or(0x1d3c), kPropertyCases)); }

TEST(Property, FixReachesFixpointAndPreservesParse) { expect_ok(fix_fixpoint_property(seed_or(0xf1c5), kPropertyCases)); }

TEST(Property, StoreLifecycleAndRoundTrip) { expect_ok(store_lifecycle_property(seed_or(0x5707e), kPropertyCases)); }

TEST(Property, RollbackIsByteExact) { expect_ok(rollback_property(seed_or(0x7011), kPropertyCases)); }

TEST(Property, VerifyBudgetIsMonotone) { expect_ok(budget_monotonicity_property(seed_or(0xb0d6), kPropertyCases)); }

TEST(Property, TemplateOneDetectorMatchesBruteForce) {
  const auto r = template1_equivalence();
  EXPECT_EQ(r.cases, 2u * 3u * (2 + 4 + 8 + 16 + 32));
  EXPECT_EQ(r.failures, 0u) << r.summary();
  for (const auto& c : r.counterexamples) ADD_FAILURE() << c;
}

}  // namespace
