#include "skylite/sim/price_sheet.hpp"

#include <algorithm>

namespace skylite {

double PriceSheet::MemoryPricePerGibHour(int memory_mib) const {
  const int clamped = std::clamp(memory_mib, kMinFunctionMemoryMib, kMaxFunctionMemoryMib);
  const double position = static_cast<double>(clamped - kMinFunctionMemoryMib) /
                          static_cast<double>(kMaxFunctionMemoryMib - kMinFunctionMemoryMib);
  return lambda_gib_hour_high - position * (lambda_gib_hour_high - lambda_gib_hour_low);
}

}  // namespace skylite
