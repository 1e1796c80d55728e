#include "skylite/storage/catalog.hpp"

#include <fstream>
#include <set>

#include "skylite/common/errors.hpp"

namespace skylite {

uint64_t TableEntry::TotalBytes() const {
  uint64_t bytes = 0;
  for (const auto& object : objects) bytes += object.file_bytes;
  return bytes;
}

uint64_t TableEntry::TotalRows() const {
  uint64_t rows = 0;
  for (const auto& object : objects) rows += object.row_count;
  return rows;
}

nlohmann::json SchemaToJson(const Schema& schema) {
  nlohmann::json columns = nlohmann::json::array();
  for (const auto& field : schema.Fields()) {
    columns.push_back({{"name", field.name}, {"type", field.type.ToString()}, {"nullable", field.nullable}});
  }
  return columns;
}

Schema SchemaFromJson(const nlohmann::json& json) {
  std::vector<Field> fields;
  for (const auto& column : json) {
    fields.push_back({column.at("name").get<std::string>(), DataType::Parse(column.at("type").get<std::string>()),
                      column.value("nullable", false)});
  }
  return Schema(std::move(fields));
}

void Catalog::Put(TableEntry table) {
  if (table.name.empty()) Fail(ErrorCode::kInvalidArgument, "table name must not be empty");
  std::set<std::string> names;
  for (const auto& field : table.schema.Fields()) {
    if (!names.insert(field.name).second) {
      Fail(ErrorCode::kInvalidArgument, "duplicate column " + field.name + " in table " + table.name);
    }
    if (field.type.id == TypeId::kDecimal &&
        (field.type.scale > field.type.precision || field.type.precision > kMaxDecimalPrecision)) {
      Fail(ErrorCode::kInvalidArgument, "invalid decimal type for column " + field.name);
    }
  }
  tables_[table.name] = std::move(table);
}

const TableEntry& Catalog::Resolve(const std::string& name) const {
  const auto it = tables_.find(name);
  if (it == tables_.end()) Fail(ErrorCode::kUnknownTable, "unknown table '" + name + "'");
  return it->second;
}

std::vector<std::string> Catalog::TableNames() const {
  std::vector<std::string> names;
  for (const auto& [name, table] : tables_) names.push_back(name);
  return names;
}

uint64_t Catalog::MaxVersion() const {
  uint64_t version = 0;
  for (const auto& [name, table] : tables_) version = std::max(version, table.version);
  return version;
}

nlohmann::json Catalog::ToJson() const {
  nlohmann::json tables = nlohmann::json::array();
  for (const auto& [name, table] : tables_) {
    nlohmann::json objects = nlohmann::json::array();
    for (const auto& object : table.objects) {
      objects.push_back({{"bucket", object.bucket},
                         {"key", object.key},
                         {"file_bytes", object.file_bytes},
                         {"row_count", object.row_count},
                         {"row_group_bytes", object.row_group_bytes},
                         {"row_group_rows", object.row_group_rows}});
    }
    tables.push_back(
        {{"name", name}, {"version", table.version}, {"columns", SchemaToJson(table.schema)}, {"objects", objects}});
  }
  return {{"tables", tables}};
}

Catalog Catalog::FromJson(const nlohmann::json& json) {
  Catalog catalog;
  for (const auto& table_json : json.at("tables")) {
    TableEntry table;
    table.name = table_json.at("name").get<std::string>();
    table.version = table_json.value("version", uint64_t{0});
    table.schema = SchemaFromJson(table_json.at("columns"));
    for (const auto& object_json : table_json.at("objects")) {
      ObjectEntry object;
      object.bucket = object_json.at("bucket").get<std::string>();
      object.key = object_json.at("key").get<std::string>();
      object.file_bytes = object_json.at("file_bytes").get<uint64_t>();
      object.row_count = object_json.at("row_count").get<uint64_t>();
      object.row_group_bytes = object_json.value("row_group_bytes", std::vector<uint64_t>{});
      object.row_group_rows = object_json.value("row_group_rows", std::vector<uint64_t>{});
      table.objects.push_back(std::move(object));
    }
    catalog.Put(std::move(table));
  }
  return catalog;
}

void Catalog::Save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  out << ToJson().dump(1) << "\n";
  if (!out) Fail(ErrorCode::kInternal, "cannot write catalog " + path.string());
}

Catalog Catalog::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return Catalog{};
  try {
    return FromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& error) {
    Fail(ErrorCode::kCorruptFile, "malformed catalog " + path.string() + ": " + error.what());
  }
}

}  // namespace skylite
