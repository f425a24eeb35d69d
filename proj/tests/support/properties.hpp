#pragma once

// Randomized property runners shared by the gtest suites and the acceptance
// binary. Each returns counts and the first few counterexamples.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace vgtest {

struct PropertyResult {
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::vector<std::string> counterexamples;  // capped
  std::map<std::string, std::size_t> stats;  // coverage counters

  bool ok() const noexcept { return cases > 0 && failures == 0; }
  void fail(std::string message);
  std::string summary() const;
};

inline constexpr std::size_t kPropertyCases = 500;

/// fold(update_index) over random edit sequences equals build_index of the
/// final file set.
PropertyResult incremental_index_property(std::uint64_t seed, std::size_t cases);

/// plan_fix + apply_fix on generated failing corpora: the fixed scope is no
/// longer detected, the record passes tier 1, touched files parse without
/// new diagnostics and stay lossless.
PropertyResult fix_fixpoint_property(std::uint64_t seed, std::size_t cases);

/// Random operation sequences against a reference model of the lifecycle,
/// with serialize/deserialize and persist/load round-trips after each step.
PropertyResult store_lifecycle_property(std::uint64_t seed, std::size_t cases);

/// Injected write failures, corrupted read-backs, stale files and
/// destructive plans leave the workspace byte-identical.
PropertyResult rollback_property(std::uint64_t seed, std::size_t cases);

/// For budgets b1 <= b2 every verdict decided under b1 is decided identically
/// under b2 and tier-1 outcomes never change.
PropertyResult budget_monotonicity_property(std::uint64_t seed, std::size_t cases);

/// Exhaustive enumeration: union size 1..5 x every case subset x default kind,
/// detector output against the brute-force predicate.
PropertyResult template1_equivalence();

}  // namespace vgtest
