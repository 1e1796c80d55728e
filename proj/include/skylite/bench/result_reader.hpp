#pragma once

#include <string>
#include <vector>

#include "skylite/execution/coordinator.hpp"
#include "skylite/storage/record_batch.hpp"

namespace skylite {

constexpr const char* kClientTag = "client";

// Downloads and decodes a query result (billed to the "client" tag).
RecordBatch FetchResult(Simulator& sim, const QueryResult& result);

// The stored bytes of every result object, in order, read without billing.
std::vector<std::string> ResultObjectBytes(const Simulator& sim, const QueryResult& result);

struct ResultComparison {
  bool equal = true;
  std::string detail;
};

// Exact comparison except float64 cells, which may differ by `float_tolerance` relative. Unordered comparisons
// sort both sides first.
ResultComparison CompareResults(const RecordBatch& expected, const RecordBatch& actual, bool ordered,
                                double float_tolerance = 1e-9);

// Fixed-width text table.
std::string FormatTable(const RecordBatch& batch, size_t max_rows = 50);

}  // namespace skylite
