#pragma once

#include <filesystem>
#include <string>

#include "skylite/sim/fault_plan.hpp"
#include "skylite/sim/latency_model.hpp"
#include "skylite/sim/price_sheet.hpp"
#include "skylite/sim/sim_types.hpp"

namespace skylite {

enum class ComputeMode { kModeled, kMeasured };

// Converts worker work into simulated compute time. Modeled mode is deterministic: each operator row and each
// decoded byte costs a fixed amount. Measured mode uses wall time. Both are scaled by the calibration factor.
struct ComputeModel {
  ComputeMode mode = ComputeMode::kModeled;
  double calibration = 1.0;
  double ns_per_row = 10.0;
  double ns_per_byte = 1.0;

  bool operator==(const ComputeModel&) const = default;
};

struct SimConfig {
  uint64_t seed = 42;
  LatencyModel latency;
  PriceSheet prices;
  FaultPlan faults;
  ComputeModel compute;
  // Idle sandboxes stay warm this long (assumption).
  SimTime keep_alive = Seconds(600);
  // Concurrent invocation quota and payload limit (assumptions, historical AWS defaults).
  int admission_quota = 1000;
  size_t payload_limit_bytes = 256 * 1024;
  double function_net_gbps = 0.63;
  // Stored bytes accrue storage-month cost for this long, charged at put time (assumption).
  double storage_retention_hours = 24;

  static SimConfig Defaults() { return SimConfig{}; }

  // "key = value" lines, '#' comments. Unknown keys are rejected. Values override `base`.
  static SimConfig Parse(const std::string& text, SimConfig base = Defaults());
  static SimConfig LoadFile(const std::filesystem::path& path, SimConfig base = Defaults());
  std::string ToConfigText() const;

  bool operator==(const SimConfig&) const = default;
};

}  // namespace skylite
