#pragma once

#include <string>

#include "skylite/sim/simulator.hpp"
#include "skylite/sql/logical_plan.hpp"
#include "skylite/storage/catalog.hpp"
#include "skylite/storage/record_batch.hpp"

namespace skylite {

// Single-threaded reference executor: evaluates the bound (unoptimized) logical plan row at a time over the
// catalog's objects with naive hash and nested-loop algorithms. Shares the frontend with the distributed
// engine but none of its execution code. Reads objects directly, without billing.
RecordBatch OracleExecute(const LogicalPlan& plan, const Simulator& sim, const Catalog& catalog);
RecordBatch OracleQuery(const std::string& sql, const Simulator& sim, const Catalog& catalog);

}  // namespace skylite
