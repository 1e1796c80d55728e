#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "skylite/common/types.hpp"

namespace skylite {

struct ObjectEntry {
  std::string bucket;
  std::string key;
  uint64_t file_bytes = 0;
  uint64_t row_count = 0;
  // Stored bytes and rows per row group, used to split objects across fragments.
  std::vector<uint64_t> row_group_bytes;
  std::vector<uint64_t> row_group_rows;

  bool operator==(const ObjectEntry&) const = default;
};

struct TableEntry {
  std::string name;
  Schema schema;
  std::vector<ObjectEntry> objects;
  // Incremented whenever the table's objects are regenerated.
  uint64_t version = 0;

  uint64_t TotalBytes() const;
  uint64_t TotalRows() const;
  bool operator==(const TableEntry&) const = default;
};

nlohmann::json SchemaToJson(const Schema& schema);
Schema SchemaFromJson(const nlohmann::json& json);

// Table names to schemas and object manifests. Validates column names and decimal bounds on insertion.
class Catalog {
 public:
  void Put(TableEntry table);
  // Throws UnknownTable.
  const TableEntry& Resolve(const std::string& name) const;
  bool Has(const std::string& name) const { return tables_.count(name) > 0; }
  std::vector<std::string> TableNames() const;
  // Highest version among tables, 0 for an empty catalog.
  uint64_t MaxVersion() const;

  nlohmann::json ToJson() const;
  static Catalog FromJson(const nlohmann::json& json);
  void Save(const std::filesystem::path& path) const;
  static Catalog Load(const std::filesystem::path& path);

 private:
  std::map<std::string, TableEntry> tables_;
};

}  // namespace skylite
