#pragma once

#include <string_view>

#include "skylite/sql/ast.hpp"
#include "skylite/sql/logical_plan.hpp"
#include "skylite/storage/catalog.hpp"

namespace skylite {

// Resolves names and types against the catalog and produces a typed logical plan: Scan/OneRow, then joins,
// Filter (where plus join conditions), Aggregate, Sort and Project (elided when it would be the identity), Limit.
// Throws UnknownTable, UnknownColumn, TypeMismatch, UngroupedColumn, NotSupported.
LogicalPlan Bind(const SelectStatement& statement, const Catalog& catalog);

// Parse and bind.
LogicalPlan BindSql(std::string_view sql, const Catalog& catalog);

}  // namespace skylite
