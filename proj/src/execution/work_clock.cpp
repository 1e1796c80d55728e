#include "skylite/execution/work_clock.hpp"

#include <algorithm>
#include <cmath>

namespace skylite {

WorkClock::WorkClock(ComputeModel model, double vcpus, int64_t start_local)
    : model_(model), speed_(std::clamp(vcpus, 0.05, 1.0)), now_(start_local), last_(std::chrono::steady_clock::now()) {}

void WorkClock::AddNanos(double nanos) {
  fraction_ns_ += nanos * model_.calibration / speed_;
  const double whole_us = std::floor(fraction_ns_ / 1000.0);
  now_ += static_cast<int64_t>(whole_us);
  fraction_ns_ -= whole_us * 1000.0;
}

void WorkClock::SyncMeasured() {
  if (model_.mode != ComputeMode::kMeasured) return;
  const auto now = std::chrono::steady_clock::now();
  AddNanos(static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(now - last_).count()));
  last_ = now;
}

void WorkClock::WaitUntil(int64_t local) {
  SyncMeasured();
  now_ = std::max(now_, local);
}

void WorkClock::ChargeRows(uint64_t rows) {
  rows_ += rows;
  if (model_.mode == ComputeMode::kModeled) AddNanos(static_cast<double>(rows) * model_.ns_per_row);
}

void WorkClock::ChargeBytes(uint64_t bytes) {
  if (model_.mode == ComputeMode::kModeled) AddNanos(static_cast<double>(bytes) * model_.ns_per_byte);
}

int64_t WorkClock::Now() {
  SyncMeasured();
  return now_;
}

}  // namespace skylite
