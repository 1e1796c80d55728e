#pragma once

#include <cstdint>
#include <vector>

#include "skylite/sql/expression.hpp"
#include "skylite/storage/record_batch.hpp"

namespace skylite {

// Column-at-a-time evaluation of a bound expression over a batch, with the value semantics documented on Expr.
Column EvaluateExpr(const Expr& expr, const RecordBatch& batch);

// Indices of the rows for which the predicate is true (null counts as false).
std::vector<uint32_t> EvaluateFilter(const Expr& predicate, const RecordBatch& batch);

// Three-way comparison of two non-null cells of compatible types (numeric families compare exactly).
int CompareCells(const Column& left, size_t left_row, const Column& right, size_t right_row);

}  // namespace skylite
