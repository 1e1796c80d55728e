#pragma once

#include "skylite/sim/sim_types.hpp"

namespace skylite {

constexpr int kMinFunctionMemoryMib = 128;
constexpr int kMaxFunctionMemoryMib = 10240;

// Per storage class, in cents.
struct StoragePrices {
  double read_per_million = 0;
  double write_per_million = 0;
  double transfer_read_per_gib = 0;
  double transfer_write_per_gib = 0;
  double storage_gib_month = 0;

  bool operator==(const StoragePrices&) const = default;
};

// Unit prices in cents, defaults from the published AWS price tables.
struct PriceSheet {
  // Lambda (ARM) memory price range [c/GiB-h]. The high end applies to the smallest size, the low end to the
  // largest; sizes in between are interpolated linearly (assumption, the source gives only the range).
  double lambda_gib_hour_low = 3.84;
  double lambda_gib_hour_high = 4.80;
  // Equivalent per-vCPU and per-Gbps views of the same charge; reported, not billed separately.
  double lambda_vcpu_hour_low = 6.79;
  double lambda_vcpu_hour_high = 8.49;
  double lambda_gbps_hour_low = 0.48;
  double lambda_gbps_hour_high = 0.60;

  StoragePrices standard{40, 500, 0, 0, 2.3};
  StoragePrices hot{20, 250, 0.15, 0.8, 16};
  StoragePrices kv{25, 125, 0, 0, 25};
  // Queue API calls (not published, assumption).
  double queue_per_million = 40;

  double MemoryPricePerGibHour(int memory_mib) const;
  const StoragePrices& Storage(StorageClass storage_class) const {
    return storage_class == StorageClass::kHot ? hot : standard;
  }

  bool operator==(const PriceSheet&) const = default;
};

}  // namespace skylite
