#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "skylite/execution/coordinator.hpp"

namespace skylite {

struct RunReport {
  std::string query_id;
  bool cache_hit = false;
  double latency_ms = 0;
  // Per cost category, in the ledger's category order.
  std::vector<std::pair<CostCategory, double>> costs_cents;
  double total_cents = 0;
  int invocations = 0;
  int retriggers = 0;
  uint64_t bytes_scanned = 0;
  std::string bucket;
  std::vector<std::string> result_keys;
  std::vector<StageReport> stages;

  double Cost(CostCategory category) const;
  nlohmann::json ToJson() const;
  std::string ToText() const;
};

// Costs are summed, in append order, over the ledger entries appended since `ledger_mark` that carry the
// query's tag.
RunReport MakeRunReport(const Simulator& sim, const QueryResult& result, size_t ledger_mark);

// Checks that the report accounts for every ledger entry appended since the mark: all of them carry the
// query's tag and their per-category sums equal the report exactly.
bool ReconcileReport(const RunReport& report, const Simulator& sim, size_t ledger_mark, std::string* detail);

// The report with the median latency (lower median for even counts).
RunReport MedianReport(std::vector<RunReport> reports);

}  // namespace skylite
