#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skylite/sim/sim_types.hpp"

namespace skylite {

enum class CostCategory {
  kComputeGibSeconds,
  kRequestsRead,
  kRequestsWrite,
  kTransferGib,
  kStorageGibMonths,
  kQueueMessages,
};

constexpr CostCategory kAllCostCategories[] = {
    CostCategory::kComputeGibSeconds, CostCategory::kRequestsRead,     CostCategory::kRequestsWrite,
    CostCategory::kTransferGib,       CostCategory::kStorageGibMonths, CostCategory::kQueueMessages,
};

std::string_view CostCategoryName(CostCategory category);

struct LedgerEntry {
  SimTime time = 0;
  CostCategory category = CostCategory::kComputeGibSeconds;
  double quantity = 0;
  double cost_cents = 0;
  // Attribution, usually the query id.
  std::string tag;
};

// Append-only.
class CostLedger {
 public:
  void Append(LedgerEntry entry) { entries_.push_back(std::move(entry)); }

  const std::vector<LedgerEntry>& Entries() const { return entries_; }
  size_t Size() const { return entries_.size(); }

  // Sums in append order so that identical filters yield bit-identical totals.
  double TotalCost(std::optional<CostCategory> category = std::nullopt,
                   std::optional<std::string_view> tag = std::nullopt) const;
  double TotalQuantity(CostCategory category, std::optional<std::string_view> tag = std::nullopt) const;

 private:
  std::vector<LedgerEntry> entries_;
};

double TotalCost(const CostLedger& ledger, std::optional<CostCategory> category = std::nullopt);

}  // namespace skylite
