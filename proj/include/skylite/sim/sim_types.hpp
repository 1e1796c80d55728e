#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace skylite {

// Simulated time in microseconds.
using SimTime = int64_t;

constexpr SimTime kMicrosPerMilli = 1000;
constexpr SimTime kMicrosPerSecond = 1000 * kMicrosPerMilli;

constexpr SimTime Millis(double ms) { return static_cast<SimTime>(ms * kMicrosPerMilli); }
constexpr SimTime Seconds(double s) { return static_cast<SimTime>(s * kMicrosPerSecond); }
constexpr double ToMillis(SimTime t) { return static_cast<double>(t) / kMicrosPerMilli; }
constexpr double ToSeconds(SimTime t) { return static_cast<double>(t) / kMicrosPerSecond; }

constexpr double kBytesPerGib = 1024.0 * 1024.0 * 1024.0;
constexpr uint64_t kKiB = 1024;
constexpr uint64_t kMiB = 1024 * kKiB;
constexpr uint64_t kGiB = 1024 * kMiB;

enum class StorageClass { kStandard, kHot };

std::string_view StorageClassName(StorageClass storage_class);
StorageClass ParseStorageClass(std::string_view name);

// Platform-independent random source: mt19937_64 bits, hand-rolled transforms.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }
  // Uniform in [0, 1).
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform integer in [lo, hi].
  int64_t UniformInt(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(engine_() % static_cast<uint64_t>(hi - lo + 1));
  }
  bool Bernoulli(double p) { return p > 0.0 && Uniform() < p; }
  // Standard normal by Box-Muller.
  double Normal() {
    double u1 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace skylite
