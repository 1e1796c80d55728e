#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace skylite {

// Lowercase hex SHA-256 digest (64 characters).
std::string Sha256Hex(std::string_view data);

// Stable across processes and platforms; used for hash partitioning and hash tables.
uint64_t StableHash64(std::string_view data, uint64_t seed = 0);

inline uint64_t MixHash(uint64_t value) {
  value ^= value >> 33;
  value *= 0xff51afd7ed558ccdULL;
  value ^= value >> 33;
  value *= 0xc4ceb9fe1a85ec53ULL;
  value ^= value >> 33;
  return value;
}

inline uint64_t CombineHash(uint64_t seed, uint64_t value) {
  return MixHash(seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

}  // namespace skylite
