#include "skylite/execution/registry.hpp"

#include "skylite/common/errors.hpp"
#include "skylite/common/hashing.hpp"

namespace skylite {

using nlohmann::json;

std::vector<std::string> RegistryEntry::OutputKeys() const {
  std::vector<std::string> keys;
  for (const auto& fragment : fragments) keys.insert(keys.end(), fragment.begin(), fragment.end());
  return keys;
}

json RegistryEntry::ToJson() const {
  return json{{"cache_key", cache_key},     {"pipeline_id", pipeline_id}, {"bucket", bucket},
              {"fragments", fragments},     {"created_at", created_at},   {"creator_query", creator_query}};
}

RegistryEntry RegistryEntry::FromJson(const json& json_entry) {
  try {
    RegistryEntry entry;
    entry.cache_key = json_entry.at("cache_key").get<std::string>();
    entry.pipeline_id = json_entry.at("pipeline_id").get<int>();
    entry.bucket = json_entry.at("bucket").get<std::string>();
    entry.fragments = json_entry.at("fragments").get<std::vector<std::vector<std::string>>>();
    entry.created_at = json_entry.at("created_at").get<SimTime>();
    entry.creator_query = json_entry.at("creator_query").get<std::string>();
    return entry;
  } catch (const json::exception& error) {
    Fail(ErrorCode::kInvalidArgument, std::string("malformed registry entry: ") + error.what());
  }
}

std::string ResultRegistryKey(const std::string& cache_key) { return "result/" + cache_key; }

std::string CheckpointRegistryKey(const std::string& cache_key, const std::string& pipeline_json,
                                  const std::vector<std::string>& dependency_keys) {
  std::string material = cache_key + "|" + pipeline_json;
  for (const auto& key : dependency_keys) material += "|" + key;
  return "stage/" + Sha256Hex(material);
}

ResultRegistry::ResultRegistry(Simulator& sim, std::string table) : sim_(sim), table_(std::move(table)) {}

std::optional<RegistryEntry> ResultRegistry::Lookup(const RequestContext& context, const std::string& key,
                                                    SimTime* latency) {
  const auto read = sim_.KvGet(context, table_, key);
  if (latency) *latency = read.latency;
  if (!read.value) return std::nullopt;
  const json parsed = json::parse(*read.value, nullptr, false);
  if (parsed.is_discarded()) return std::nullopt;
  RegistryEntry entry;
  try {
    entry = RegistryEntry::FromJson(parsed);
  } catch (const SkyliteError&) {
    return std::nullopt;
  }
  for (const auto& object : entry.OutputKeys()) {
    if (!sim_.PeekObject(entry.bucket, object)) return std::nullopt;
  }
  return entry;
}

SimTime ResultRegistry::Register(const RequestContext& context, const std::string& key, const RegistryEntry& entry) {
  return sim_.KvPut(context, table_, key, entry.ToJson().dump());
}

std::vector<std::pair<std::string, RegistryEntry>> ResultRegistry::List(const RequestContext& context) {
  std::vector<std::pair<std::string, RegistryEntry>> result;
  for (const auto& [key, value] : sim_.KvScan(context, table_)) {
    const json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) continue;
    try {
      result.emplace_back(key, RegistryEntry::FromJson(parsed));
    } catch (const SkyliteError&) {
    }
  }
  return result;
}

void ResultRegistry::Clear() { sim_.KvClear(table_); }

}  // namespace skylite
