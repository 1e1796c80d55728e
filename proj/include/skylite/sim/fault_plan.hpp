#pragma once

#include <cstdint>

namespace skylite {

struct FaultPlan {
  double straggler_fraction = 0;
  // Multiplies the affected invocation's elapsed time or request's latency.
  double straggler_slowdown = 1;
  double crash_fraction = 0;
  bool affect_invocations = true;
  bool affect_storage_requests = true;
  // Probability that a received queue message stays visible and is delivered again.
  double queue_duplicate_fraction = 0;
  uint64_t rng_seed = 0;

  bool IsNeutral() const { return straggler_fraction == 0 && crash_fraction == 0 && queue_duplicate_fraction == 0; }
  void Validate() const;

  bool operator==(const FaultPlan&) const = default;
};

}  // namespace skylite
