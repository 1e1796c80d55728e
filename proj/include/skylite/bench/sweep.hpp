#pragma once

#include <string>
#include <vector>

#include "skylite/bench/datagen.hpp"
#include "skylite/execution/coordinator.hpp"
#include "skylite/sim/sim_config.hpp"

namespace skylite {

struct SweepOptions {
  std::vector<double> scale_factors = {0.001, 0.01, 0.1, 1};
  std::vector<int> queries = {1, 6};
  SimConfig config;
  // The cache is always off: every run is cold.
  QueryOptions query;
  DataGenSpec data;
};

struct SweepRun {
  int query = 0;
  double latency_ms = 0;
  double cost_cents = 0;
  int invocations = 0;
  int retriggers = 0;
  int max_fragments = 0;
};

struct SweepRow {
  double scale_factor = 0;
  uint64_t data_bytes = 0;
  std::vector<SweepRun> runs;
  // Summed over the queries' cold runs.
  double latency_ms = 0;
  double cost_cents = 0;
};

// For each scale factor: generates the data once, then runs every query on a fresh simulator holding only the
// data (no warm sandboxes, no registry).
std::vector<SweepRow> RunSweep(const SweepOptions& options);
std::string FormatSweep(const std::vector<SweepRow>& rows);

}  // namespace skylite
