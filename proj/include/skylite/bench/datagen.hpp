#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skylite/sim/simulator.hpp"
#include "skylite/storage/catalog.hpp"

namespace skylite {

// Deterministic pseudo-TPC-H data: value distributions approximate the reference generator (dates 1992-1998,
// fixed flag, status, priority and ship-mode dictionaries), row counts scale linearly with the scale factor.
struct DataGenSpec {
  double scale_factor = 0.01;
  uint64_t seed = 1;
  std::vector<std::string> tables = {"lineitem", "orders"};
  uint64_t target_file_bytes = 8 * kMiB;
  size_t row_group_rows = 131072;
  std::string bucket = "skylite-data";
  std::string prefix = "tpch";
};

Schema LineitemSchema();
Schema OrdersSchema();
// round(1,500,000 x SF), at least one.
uint64_t OrdersRowCount(double scale_factor);

// Generates the tables, writes them as columnar objects (split at the target file size) and returns the catalog
// with every generated table's version one above its version in `previous`.
Catalog GenerateTpch(Simulator& sim, const DataGenSpec& spec, const Catalog& previous = {});

}  // namespace skylite
