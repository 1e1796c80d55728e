#pragma once

#include <string>

#include "skylite/sim/sim_types.hpp"

namespace skylite {

// Log-normal fitted to (median, p99.9 tail), clamped to [min, max]. All values in milliseconds.
struct LatencyDistribution {
  double min_ms = 0;
  double median_ms = 0;
  double tail_ms = 0;
  double max_ms = 0;

  // z-score of the 99.9th percentile of the standard normal.
  static constexpr double kTailZ = 3.090232306167813;

  double Sigma() const;
  SimTime Sample(Rng& rng) const;
  void Validate(const std::string& name) const;
  std::string ToString() const;
  static LatencyDistribution Parse(const std::string& text);

  bool operator==(const LatencyDistribution&) const = default;
};

struct LatencyModel {
  // Lambda start latency; the published average is used as the median, the maximum as the tail.
  LatencyDistribution cold_start{122, 185, 451, 451};
  LatencyDistribution warm_start{5, 6, 9, 9};
  // Client-side cost of one asynchronous invoke API call (not published, assumption).
  LatencyDistribution invoke_request{1, 3, 20, 50};
  // Object storage, 1 KiB requests; min/max are assumptions around the published median/tail.
  LatencyDistribution standard_read{8, 27, 1000, 2000};
  LatencyDistribution standard_write{12, 40, 500, 1000};
  LatencyDistribution hot_read{2, 5, 120, 250};
  LatencyDistribution hot_write{3, 8, 150, 300};
  // Key-value store backing the result registry.
  LatencyDistribution kv_read{1, 4, 100, 200};
  LatencyDistribution kv_write{2, 6, 250, 500};
  // Message queue (not published, assumption).
  LatencyDistribution queue_send{3, 10, 100, 200};
  LatencyDistribution queue_receive{3, 10, 100, 200};

  const LatencyDistribution& StorageRead(StorageClass storage_class) const {
    return storage_class == StorageClass::kHot ? hot_read : standard_read;
  }
  const LatencyDistribution& StorageWrite(StorageClass storage_class) const {
    return storage_class == StorageClass::kHot ? hot_write : standard_write;
  }

  bool operator==(const LatencyModel&) const = default;
};

}  // namespace skylite
