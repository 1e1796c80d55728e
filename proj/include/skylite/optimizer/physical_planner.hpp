#pragma once

#include <cstdint>
#include <optional>

#include "skylite/optimizer/logical_optimizer.hpp"
#include "skylite/optimizer/physical_plan.hpp"
#include "skylite/optimizer/sizing.hpp"

namespace skylite {

struct PlannerOptions {
  SizingModel sizing;
  // A join broadcasts its build side when the estimated build bytes are at most this budget divided by the
  // probe pipeline's worker count.
  uint64_t broadcast_budget_bytes = 512 * kMiB;
  // Exchange writes of more than this many objects (partitions x writers) go to the hot storage class.
  uint64_t hot_tier_objects = 4096;
  // Overrides the sized worker count of scan and repartition-join pipelines.
  std::optional<int> force_workers;
  std::optional<JoinMode> force_join_mode;
};

// Maps a logically optimized plan to pipelines split at pipeline breakers: aggregates become partial/final
// pairs around an exchange, joins broadcast or repartition their inputs, and sorts and limits over several
// fragments gather into a single final fragment.
PhysicalQueryPlan PlanPhysical(const LogicalPlan& plan, const TableBytes& stats, const PlannerOptions& options = {});

}  // namespace skylite
