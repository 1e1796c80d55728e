#include "skylite/optimizer/fragment_spec.hpp"

#include <algorithm>
#include <numeric>

#include "skylite/common/errors.hpp"
#include "skylite/storage/output_handler.hpp"

namespace skylite {

namespace {

using nlohmann::json;

struct Unit {
  size_t object;
  size_t row_group;
  uint64_t bytes;
};

std::vector<ScanAssignment> PackUnits(const std::vector<Unit>& units, const TableEntry& table, int parts) {
  std::vector<uint64_t> sizes;
  for (const auto& unit : units) sizes.push_back(unit.bytes);
  std::vector<ScanAssignment> assignments;
  for (const auto& bin : BinPack(sizes, parts)) {
    ScanAssignment assignment;
    for (size_t index : bin) {
      const auto& unit = units[index];
      const auto& object = table.objects[unit.object];
      if (assignment.objects.empty() || assignment.objects.back().key != object.key) {
        assignment.objects.push_back({object.bucket, object.key, {}});
      }
      assignment.objects.back().row_groups.push_back(unit.row_group);
      assignment.bytes += unit.bytes;
    }
    assignments.push_back(std::move(assignment));
  }
  return assignments;
}

const ObjectEntry& FindObject(const TableEntry& table, const ScanObject& object, size_t& index) {
  for (size_t i = 0; i < table.objects.size(); ++i) {
    if (table.objects[i].bucket == object.bucket && table.objects[i].key == object.key) {
      index = i;
      return table.objects[i];
    }
  }
  Fail(ErrorCode::kInvalidArgument, "object " + object.key + " is not part of table " + table.name);
}

}  // namespace

std::vector<std::vector<size_t>> BinPack(const std::vector<uint64_t>& sizes, int bins) {
  Assert(bins >= 1, "bin packing needs at least one bin");
  std::vector<size_t> order(sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return sizes[a] > sizes[b]; });
  std::vector<std::vector<size_t>> result(static_cast<size_t>(bins));
  std::vector<uint64_t> load(static_cast<size_t>(bins), 0);
  for (size_t item : order) {
    const size_t bin = static_cast<size_t>(std::min_element(load.begin(), load.end()) - load.begin());
    result[bin].push_back(item);
    load[bin] += sizes[item];
  }
  for (auto& bin : result) std::sort(bin.begin(), bin.end());
  return result;
}

std::vector<ScanAssignment> FragmentizeScan(const TableEntry& table, int fragments) {
  if (table.objects.size() >= static_cast<size_t>(fragments)) {
    std::vector<uint64_t> sizes;
    for (const auto& object : table.objects) sizes.push_back(object.file_bytes);
    std::vector<ScanAssignment> assignments;
    for (const auto& bin : BinPack(sizes, fragments)) {
      ScanAssignment assignment;
      for (size_t index : bin) {
        const auto& object = table.objects[index];
        assignment.objects.push_back({object.bucket, object.key, {}});
        assignment.bytes += object.file_bytes;
      }
      assignments.push_back(std::move(assignment));
    }
    return assignments;
  }
  std::vector<Unit> units;
  for (size_t i = 0; i < table.objects.size(); ++i) {
    const auto& object = table.objects[i];
    for (size_t g = 0; g < object.row_group_bytes.size(); ++g) units.push_back({i, g, object.row_group_bytes[g]});
  }
  return PackUnits(units, table, fragments);
}

std::vector<ScanAssignment> SplitAssignment(const ScanAssignment& assignment, const TableEntry& table, int parts) {
  std::vector<Unit> units;
  for (const auto& scan_object : assignment.objects) {
    size_t index = 0;
    const auto& object = FindObject(table, scan_object, index);
    if (scan_object.row_groups.empty()) {
      for (size_t g = 0; g < object.row_group_bytes.size(); ++g) units.push_back({index, g, object.row_group_bytes[g]});
    } else {
      for (size_t g : scan_object.row_groups) units.push_back({index, g, object.row_group_bytes.at(g)});
    }
  }
  return PackUnits(units, table, parts);
}

std::string FragmentSpec::OutputKey(int partition) const {
  return OutputObjectKey(query_id, pipeline_id, fragment_id, partition);
}

json FragmentSpec::ToJson() const {
  json ops = json::array();
  for (const auto& op : operators) ops.push_back(op.ToJson());
  json objects = json::array();
  for (const auto& object : scan.objects) {
    objects.push_back({{"bucket", object.bucket}, {"key", object.key}, {"row_groups", object.row_groups}});
  }
  json inputs = json::object();
  for (const auto& [pipeline, keys] : exchange_inputs) inputs[std::to_string(pipeline)] = keys;
  return {{"query_id", query_id},
          {"pipeline_id", pipeline_id},
          {"fragment_id", fragment_id},
          {"fragment_count", fragment_count},
          {"operators", ops},
          {"scan", {{"objects", objects}, {"bytes", scan.bytes}}},
          {"exchange_inputs", inputs},
          {"intermediate_bucket", intermediate_bucket},
          {"memory_mib", memory_mib},
          {"memory_budget_bytes", memory_budget_bytes},
          {"response_queue", response_queue},
          {"io", {{"parallelism", io_parallelism}, {"retrigger", io_retrigger}}}};
}

FragmentSpec FragmentSpec::FromJson(const json& json_spec) {
  FragmentSpec spec;
  spec.query_id = json_spec.at("query_id").get<std::string>();
  spec.pipeline_id = json_spec.at("pipeline_id").get<int>();
  spec.fragment_id = json_spec.at("fragment_id").get<int>();
  spec.fragment_count = json_spec.at("fragment_count").get<int>();
  for (const auto& op : json_spec.at("operators")) spec.operators.push_back(PhysicalOperator::FromJson(op));
  for (const auto& object : json_spec.at("scan").at("objects")) {
    spec.scan.objects.push_back({object.at("bucket").get<std::string>(), object.at("key").get<std::string>(),
                                 object.at("row_groups").get<std::vector<size_t>>()});
  }
  spec.scan.bytes = json_spec.at("scan").at("bytes").get<uint64_t>();
  for (const auto& [pipeline, keys] : json_spec.at("exchange_inputs").items()) {
    spec.exchange_inputs[std::stoi(pipeline)] = keys.get<std::vector<std::string>>();
  }
  spec.intermediate_bucket = json_spec.at("intermediate_bucket").get<std::string>();
  spec.memory_mib = json_spec.at("memory_mib").get<int>();
  spec.memory_budget_bytes = json_spec.at("memory_budget_bytes").get<uint64_t>();
  spec.response_queue = json_spec.at("response_queue").get<std::string>();
  spec.io_parallelism = json_spec.at("io").at("parallelism").get<size_t>();
  spec.io_retrigger = json_spec.at("io").at("retrigger").get<bool>();
  if (spec.operators.empty()) Fail(ErrorCode::kInvalidArgument, "fragment without operators");
  return spec;
}

FragmentSpec FragmentSpec::Deserialize(const std::string& text) {
  try {
    return FromJson(json::parse(text));
  } catch (const json::exception& error) {
    Fail(ErrorCode::kInvalidArgument, std::string("malformed fragment request: ") + error.what());
  }
}

std::string_view FailureClassName(FailureClass failure) {
  switch (failure) {
    case FailureClass::kNone:
      return "none";
    case FailureClass::kCodeError:
      return "code_error";
    case FailureClass::kDataSkew:
      return "data_skew";
    case FailureClass::kTransient:
      return "transient";
  }
  return "?";
}

FailureClass ParseFailureClass(std::string_view name) {
  for (auto failure : {FailureClass::kNone, FailureClass::kCodeError, FailureClass::kDataSkew, FailureClass::kTransient}) {
    if (FailureClassName(failure) == name) return failure;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown failure class '" + std::string(name) + "'");
}

json WorkerResponse::ToJson() const {
  return {{"query_id", query_id},
          {"pipeline_id", pipeline_id},
          {"fragment_id", fragment_id},
          {"invocation", invocation},
          {"output_keys", output_keys},
          {"stats",
           {{"rows_in", stats.rows_in},
            {"rows_out", stats.rows_out},
            {"bytes_read", stats.bytes_read},
            {"bytes_written", stats.bytes_written},
            {"wall_ms", stats.wall_ms},
            {"requests", stats.requests},
            {"retriggers", stats.retriggers}}},
          {"failure", std::string(FailureClassName(failure))},
          {"error_code", error_code},
          {"error", error}};
}

WorkerResponse WorkerResponse::FromJson(const json& json_response) {
  WorkerResponse response;
  response.query_id = json_response.at("query_id").get<std::string>();
  response.pipeline_id = json_response.at("pipeline_id").get<int>();
  response.fragment_id = json_response.at("fragment_id").get<int>();
  response.invocation = json_response.at("invocation").get<uint64_t>();
  response.output_keys = json_response.at("output_keys").get<std::vector<std::string>>();
  const auto& stats = json_response.at("stats");
  response.stats.rows_in = stats.at("rows_in").get<uint64_t>();
  response.stats.rows_out = stats.at("rows_out").get<uint64_t>();
  response.stats.bytes_read = stats.at("bytes_read").get<uint64_t>();
  response.stats.bytes_written = stats.at("bytes_written").get<uint64_t>();
  response.stats.wall_ms = stats.at("wall_ms").get<double>();
  response.stats.requests = stats.at("requests").get<uint64_t>();
  response.stats.retriggers = stats.at("retriggers").get<uint64_t>();
  response.failure = ParseFailureClass(json_response.at("failure").get<std::string>());
  response.error_code = json_response.at("error_code").get<std::string>();
  response.error = json_response.at("error").get<std::string>();
  return response;
}

WorkerResponse WorkerResponse::Deserialize(const std::string& text) {
  try {
    return FromJson(json::parse(text));
  } catch (const json::exception& error) {
    Fail(ErrorCode::kInvalidArgument, std::string("malformed worker response: ") + error.what());
  }
}

}  // namespace skylite
