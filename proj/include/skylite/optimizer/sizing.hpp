#pragma once

#include <cstdint>

#include "skylite/sim/sim_types.hpp"

namespace skylite {

struct SizingModel {
  // Per-function network burst bandwidth.
  double bandwidth_gbps = 0.63;
  // Target duration of a stage's network transfer.
  double target_seconds = 10.0;
  int max_workers = 2500;
  uint64_t min_bytes_per_fragment = 32 * kMiB;

  uint64_t BytesPerFragment() const;
  bool operator==(const SizingModel&) const = default;
};

// W = clamp(ceil(input_bytes / max(min_bytes_per_fragment, bandwidth x target_seconds)), 1, max_workers).
int SizePipeline(uint64_t input_bytes, const SizingModel& model);

}  // namespace skylite
