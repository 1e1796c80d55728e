#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "skylite/sql/logical_plan.hpp"

namespace skylite {

// Stored bytes per table; the only statistics the rules use.
using TableBytes = std::map<std::string, uint64_t>;

// Folds constant subexpressions and simplifies boolean connectives with constant operands.
Expr FoldConstants(const Expr& expr);

// Estimated bytes produced by a subtree: scanned bytes scaled by the fraction of projected columns.
uint64_t EstimateBytes(const LogicalPlan& plan, const TableBytes& stats);

// Applies constant folding, predicate pushdown (with equi-join key extraction), projection pruning and join
// input ordering (smaller estimated side becomes the build side) until the plan stops changing. The output
// schema is preserved, column order included.
LogicalPlan OptimizeLogical(LogicalPlan plan, const TableBytes& stats = {});

}  // namespace skylite
