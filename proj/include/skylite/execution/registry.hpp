#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "skylite/sim/simulator.hpp"

namespace skylite {

constexpr const char* kDefaultRegistryTable = "skylite-registry";

// Materialized outputs of one pipeline: per fragment (in position order), one object key per partition.
struct RegistryEntry {
  std::string cache_key;
  int pipeline_id = 0;
  std::string bucket;
  std::vector<std::vector<std::string>> fragments;
  SimTime created_at = 0;
  std::string creator_query;

  std::vector<std::string> OutputKeys() const;
  nlohmann::json ToJson() const;
  static RegistryEntry FromJson(const nlohmann::json& json);
  bool operator==(const RegistryEntry&) const = default;
};

// Key of a final query result: the result cache key of the optimized logical plan.
std::string ResultRegistryKey(const std::string& cache_key);
// Key of one pipeline's checkpoint: the query's cache key, the pipeline's physical form and the checkpoint keys
// of the pipelines it reads.
std::string CheckpointRegistryKey(const std::string& cache_key, const std::string& pipeline_json,
                                  const std::vector<std::string>& dependency_keys);

// Durable map from plan fingerprints to materialized outputs, stored in the simulated key-value store.
// Writes are single-key and last-writer-wins, which is safe because entries for one key are identical.
class ResultRegistry {
 public:
  explicit ResultRegistry(Simulator& sim, std::string table = kDefaultRegistryTable);

  // Returns nothing when the entry is absent or any of its objects no longer exists. `latency` receives the
  // key-value read latency.
  std::optional<RegistryEntry> Lookup(const RequestContext& context, const std::string& key, SimTime* latency);
  // Returns the write latency.
  SimTime Register(const RequestContext& context, const std::string& key, const RegistryEntry& entry);
  std::vector<std::pair<std::string, RegistryEntry>> List(const RequestContext& context);
  void Clear();

 private:
  Simulator& sim_;
  std::string table_;
};

}  // namespace skylite
