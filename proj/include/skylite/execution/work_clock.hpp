#pragma once

#include <chrono>
#include <cstdint>

#include "skylite/sim/sim_config.hpp"

namespace skylite {

// A worker's compute timeline in local time. Compute is single-threaded: a batch is processed no earlier than
// its input is available, and processing advances the clock by the modeled (rows and bytes times unit costs)
// or measured (wall time) cost, scaled by the calibration factor and the function's vCPU share.
class WorkClock {
 public:
  WorkClock(ComputeModel model, double vcpus, int64_t start_local);

  // Waits (idles) until the given local time.
  void WaitUntil(int64_t local);
  void ChargeRows(uint64_t rows);
  void ChargeBytes(uint64_t bytes);
  // Local time now, including measured compute since the last call in measured mode.
  int64_t Now();
  uint64_t RowsCharged() const { return rows_; }

 private:
  void AddNanos(double nanos);
  void SyncMeasured();

  ComputeModel model_;
  double speed_;
  int64_t now_;
  double fraction_ns_ = 0;
  uint64_t rows_ = 0;
  std::chrono::steady_clock::time_point last_;
};

}  // namespace skylite
