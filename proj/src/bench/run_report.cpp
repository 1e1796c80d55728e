#include "skylite/bench/run_report.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "skylite/common/errors.hpp"

namespace skylite {

using nlohmann::json;

double RunReport::Cost(CostCategory category) const {
  for (const auto& [c, cents] : costs_cents) {
    if (c == category) return cents;
  }
  return 0;
}

json RunReport::ToJson() const {
  json costs = json::object();
  for (const auto& [category, cents] : costs_cents) costs[std::string(CostCategoryName(category))] = cents;
  json stage_list = json::array();
  for (const auto& stage : stages) {
    stage_list.push_back({{"pipeline", stage.pipeline_id},
                          {"fragments", stage.fragments},
                          {"cache_hit", stage.cache_hit},
                          {"invocations", stage.invocations},
                          {"roots", stage.roots},
                          {"retriggers", stage.retriggers},
                          {"splits", stage.splits},
                          {"duration_ms", ToMillis(stage.end - stage.start)},
                          {"bytes_read", stage.bytes_read},
                          {"bytes_written", stage.bytes_written},
                          {"rows_out", stage.rows_out},
                          {"requests", stage.requests}});
  }
  return json{{"query_id", query_id},
              {"cache_hit", cache_hit},
              {"latency_ms", latency_ms},
              {"cost_cents", costs},
              {"total_cents", total_cents},
              {"invocations", invocations},
              {"retriggers", retriggers},
              {"bytes_scanned", bytes_scanned},
              {"result", {{"bucket", bucket}, {"keys", result_keys}}},
              {"stages", stage_list}};
}

std::string RunReport::ToText() const {
  std::ostringstream out;
  out << std::fixed;
  out << "query        " << query_id << (cache_hit ? "  (result cache hit)" : "") << '\n';
  out << "latency      " << std::setprecision(1) << latency_ms << " ms\n";
  out << "invocations  " << invocations << "  (retriggers " << retriggers << ")\n";
  out << "scanned      " << bytes_scanned << " bytes\n";
  out << "cost         " << std::setprecision(6) << total_cents << " cents\n";
  for (const auto& [category, cents] : costs_cents) {
    out << "  " << std::left << std::setw(20) << CostCategoryName(category) << std::right << std::setprecision(6)
        << cents << '\n';
  }
  out << "stages\n";
  out << "  pipe  frags  invoc  retrig  split  cache  duration_ms    bytes_read  bytes_written\n";
  for (const auto& stage : stages) {
    out << "  " << std::setw(4) << stage.pipeline_id << std::setw(7) << stage.fragments << std::setw(7)
        << stage.invocations << std::setw(8) << stage.retriggers << std::setw(7) << stage.splits << std::setw(7)
        << (stage.cache_hit ? "hit" : "-") << std::setw(13) << std::setprecision(1) << ToMillis(stage.end - stage.start)
        << std::setw(14) << stage.bytes_read << std::setw(15) << stage.bytes_written << '\n';
  }
  out << "result       " << bucket << '/' << (result_keys.empty() ? "" : result_keys.front())
      << (result_keys.size() > 1 ? " (+" + std::to_string(result_keys.size() - 1) + " objects)" : "") << '\n';
  return out.str();
}

RunReport MakeRunReport(const Simulator& sim, const QueryResult& result, size_t ledger_mark) {
  RunReport report;
  report.query_id = result.query_id;
  report.cache_hit = result.result_cache_hit;
  report.latency_ms = ToMillis(result.Latency());
  report.invocations = result.Invocations();
  report.retriggers = result.Retriggers();
  report.bytes_scanned = result.BytesScanned();
  report.bucket = result.bucket;
  report.result_keys = result.result_keys;
  report.stages = result.stages;
  const CostLedger ledger = sim.Ledger();
  for (const auto category : kAllCostCategories) report.costs_cents.emplace_back(category, 0.0);
  const auto& entries = ledger.Entries();
  for (size_t i = ledger_mark; i < entries.size(); ++i) {
    const auto& entry = entries[i];
    if (entry.tag != result.query_id) continue;
    for (auto& [category, cents] : report.costs_cents) {
      if (category == entry.category) cents += entry.cost_cents;
    }
  }
  for (const auto& [category, cents] : report.costs_cents) report.total_cents += cents;
  return report;
}

bool ReconcileReport(const RunReport& report, const Simulator& sim, size_t ledger_mark, std::string* detail) {
  const CostLedger ledger = sim.Ledger();
  CostLedger delta;
  const auto& entries = ledger.Entries();
  for (size_t i = ledger_mark; i < entries.size(); ++i) {
    if (entries[i].tag != report.query_id) {
      if (detail) *detail = "ledger entry " + std::to_string(i) + " is tagged '" + entries[i].tag + "'";
      return false;
    }
    delta.Append(entries[i]);
  }
  double total = 0;
  for (const auto category : kAllCostCategories) {
    const double expected = delta.TotalCost(category);
    if (expected != report.Cost(category)) {
      if (detail) *detail = std::string(CostCategoryName(category)) + " differs from the ledger";
      return false;
    }
    total += expected;
  }
  if (total != report.total_cents) {
    if (detail) *detail = "total differs from the ledger";
    return false;
  }
  return true;
}

RunReport MedianReport(std::vector<RunReport> reports) {
  if (reports.empty()) Fail(ErrorCode::kInvalidArgument, "no reports");
  std::stable_sort(reports.begin(), reports.end(),
                   [](const RunReport& a, const RunReport& b) { return a.latency_ms < b.latency_ms; });
  return reports[(reports.size() - 1) / 2];
}

}  // namespace skylite
