#include "skylite/optimizer/sizing.hpp"

#include <algorithm>
#include <cmath>

namespace skylite {

uint64_t SizingModel::BytesPerFragment() const {
  const double bandwidth_bytes = bandwidth_gbps * 1e9 / 8.0;
  const auto per_fragment = static_cast<uint64_t>(std::llround(bandwidth_bytes * target_seconds));
  return std::max<uint64_t>({min_bytes_per_fragment, per_fragment, 1});
}

int SizePipeline(uint64_t input_bytes, const SizingModel& model) {
  const uint64_t per_fragment = model.BytesPerFragment();
  const uint64_t needed = input_bytes / per_fragment + (input_bytes % per_fragment != 0 ? 1 : 0);
  return static_cast<int>(std::clamp<uint64_t>(needed, 1, static_cast<uint64_t>(std::max(1, model.max_workers))));
}

}  // namespace skylite
