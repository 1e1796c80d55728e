#include "skylite/sim/cost_ledger.hpp"

namespace skylite {

std::string_view CostCategoryName(CostCategory category) {
  switch (category) {
    case CostCategory::kComputeGibSeconds:
      return "compute_gib_s";
    case CostCategory::kRequestsRead:
      return "requests_read";
    case CostCategory::kRequestsWrite:
      return "requests_write";
    case CostCategory::kTransferGib:
      return "transfer_gib";
    case CostCategory::kStorageGibMonths:
      return "storage_gib_mo";
    case CostCategory::kQueueMessages:
      return "queue_msgs";
  }
  return "unknown";
}

double CostLedger::TotalCost(std::optional<CostCategory> category, std::optional<std::string_view> tag) const {
  double total = 0;
  for (const auto& entry : entries_) {
    if (category && entry.category != *category) continue;
    if (tag && entry.tag != *tag) continue;
    total += entry.cost_cents;
  }
  return total;
}

double CostLedger::TotalQuantity(CostCategory category, std::optional<std::string_view> tag) const {
  double total = 0;
  for (const auto& entry : entries_) {
    if (entry.category != category) continue;
    if (tag && entry.tag != *tag) continue;
    total += entry.quantity;
  }
  return total;
}

double TotalCost(const CostLedger& ledger, std::optional<CostCategory> category) {
  return ledger.TotalCost(category);
}

}  // namespace skylite
