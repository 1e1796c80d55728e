#include "skylite/sim/sim_config.hpp"

#include <fstream>
#include <functional>
#include <charconv>
#include <sstream>
#include <vector>

#include "skylite/common/errors.hpp"

namespace skylite {

void FaultPlan::Validate() const {
  const auto probability = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!probability(straggler_fraction) || !probability(crash_fraction) || !probability(queue_duplicate_fraction)) {
    Fail(ErrorCode::kInvalidArgument, "fault probabilities must lie in [0, 1]");
  }
  if (straggler_slowdown < 1.0) {
    Fail(ErrorCode::kInvalidArgument, "straggler slowdown must be >= 1");
  }
}

namespace {

std::string Trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

uint64_t ParseUnsigned(const std::string& key, const std::string& text) {
  uint64_t value = 0;
  const auto [end, error] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (error != std::errc() || end != text.data() + text.size() || text.empty()) {
    Fail(ErrorCode::kInvalidArgument, "config key '" + key + "' expects an unsigned integer, got '" + text + "'");
  }
  return value;
}

double ParseDouble(const std::string& key, const std::string& text) {
  size_t consumed = 0;
  double value = 0;
  try {
    value = std::stod(text, &consumed);
  } catch (const std::exception&) {
    consumed = 0;
  }
  if (consumed == 0 || consumed != text.size()) {
    Fail(ErrorCode::kInvalidArgument, "config key '" + key + "' expects a number, got '" + text + "'");
  }
  return value;
}

std::pair<double, double> ParseRange(const std::string& key, const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) {
    const double value = ParseDouble(key, text);
    return {value, value};
  }
  return {ParseDouble(key, Trim(text.substr(0, slash))), ParseDouble(key, Trim(text.substr(slash + 1)))};
}

std::string FormatDouble(double value) {
  std::ostringstream out;
  out.precision(15);
  out << value;
  return out.str();
}

struct ConfigKey {
  std::string key;
  std::string comment;
  std::function<void(SimConfig&, const std::string&)> set;
  std::function<std::string(const SimConfig&)> get;
};

ConfigKey LatencyKey(std::string key, std::string comment, LatencyDistribution LatencyModel::*member) {
  return {key, std::move(comment),
          [member, key](SimConfig& config, const std::string& value) {
            auto distribution = LatencyDistribution::Parse(value);
            distribution.Validate(key);
            config.latency.*member = distribution;
          },
          [member](const SimConfig& config) { return (config.latency.*member).ToString(); }};
}

ConfigKey NumberKey(std::string key, std::string comment, std::function<double&(SimConfig&)> field) {
  return {key, std::move(comment),
          [field, key](SimConfig& config, const std::string& value) { field(config) = ParseDouble(key, value); },
          [field](const SimConfig& config) { return FormatDouble(field(const_cast<SimConfig&>(config))); }};
}

ConfigKey RangeKey(std::string key, std::string comment, double PriceSheet::*low, double PriceSheet::*high) {
  return {key, std::move(comment),
          [low, high, key](SimConfig& config, const std::string& value) {
            const auto [lo, hi] = ParseRange(key, value);
            config.prices.*low = lo;
            config.prices.*high = hi;
          },
          [low, high](const SimConfig& config) {
            return FormatDouble(config.prices.*low) + "/" + FormatDouble(config.prices.*high);
          }};
}

void AddStorageKeys(std::vector<ConfigKey>& keys, const std::string& prefix, LatencyDistribution LatencyModel::*read,
                    LatencyDistribution LatencyModel::*write, StoragePrices PriceSheet::*prices) {
  keys.push_back(LatencyKey(prefix + ".read", "ms min/median/tail(p99.9)/max", read));
  keys.push_back(LatencyKey(prefix + ".write", "ms min/median/tail(p99.9)/max", write));
  keys.push_back(NumberKey(prefix + ".read.request_price", "cents per million requests",
                           [prices](SimConfig& c) -> double& { return (c.prices.*prices).read_per_million; }));
  keys.push_back(NumberKey(prefix + ".write.request_price", "cents per million requests",
                           [prices](SimConfig& c) -> double& { return (c.prices.*prices).write_per_million; }));
  keys.push_back(NumberKey(prefix + ".read.transfer_price", "cents per GiB",
                           [prices](SimConfig& c) -> double& { return (c.prices.*prices).transfer_read_per_gib; }));
  keys.push_back(NumberKey(prefix + ".write.transfer_price", "cents per GiB",
                           [prices](SimConfig& c) -> double& { return (c.prices.*prices).transfer_write_per_gib; }));
  keys.push_back(NumberKey(prefix + ".storage.price", "cents per GiB-month",
                           [prices](SimConfig& c) -> double& { return (c.prices.*prices).storage_gib_month; }));
}

const std::vector<ConfigKey>& Keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    k.push_back({"seed", "latency sampling seed",
                 [](SimConfig& c, const std::string& v) { c.seed = ParseUnsigned("seed", v); },
                 [](const SimConfig& c) { return std::to_string(c.seed); }});
    k.push_back(LatencyKey("lambda.cold.start", "ms; published min/avg/max, avg used as median",
                           &LatencyModel::cold_start));
    k.push_back(LatencyKey("lambda.warm.start", "ms; published min/avg/max, avg used as median",
                           &LatencyModel::warm_start));
    k.push_back(LatencyKey("lambda.invoke.request", "ms per async invoke API call (assumption)",
                           &LatencyModel::invoke_request));
    k.push_back(RangeKey("lambda.memory.price", "cents per GiB-hour, largest/smallest memory size",
                         &PriceSheet::lambda_gib_hour_low, &PriceSheet::lambda_gib_hour_high));
    k.push_back(RangeKey("lambda.vcpu.price", "cents per vCPU-hour (reported only)", &PriceSheet::lambda_vcpu_hour_low,
                         &PriceSheet::lambda_vcpu_hour_high));
    k.push_back(RangeKey("lambda.network.price", "cents per Gbps-hour (reported only)",
                         &PriceSheet::lambda_gbps_hour_low, &PriceSheet::lambda_gbps_hour_high));
    k.push_back(NumberKey("lambda.network.gbps", "per-function network bandwidth",
                          [](SimConfig& c) -> double& { return c.function_net_gbps; }));
    k.push_back({"lambda.keep_alive_s", "idle sandbox lifetime (assumption)",
                 [](SimConfig& c, const std::string& v) { c.keep_alive = Seconds(ParseDouble("keep_alive", v)); },
                 [](const SimConfig& c) { return FormatDouble(ToSeconds(c.keep_alive)); }});
    k.push_back({"lambda.admission_quota", "concurrent invocations (assumption)",
                 [](SimConfig& c, const std::string& v) {
                   c.admission_quota = static_cast<int>(ParseDouble("admission_quota", v));
                 },
                 [](const SimConfig& c) { return std::to_string(c.admission_quota); }});
    k.push_back({"lambda.payload_limit_bytes", "request payload limit (assumption)",
                 [](SimConfig& c, const std::string& v) {
                   c.payload_limit_bytes = static_cast<size_t>(ParseDouble("payload_limit", v));
                 },
                 [](const SimConfig& c) { return std::to_string(c.payload_limit_bytes); }});
    AddStorageKeys(k, "s3.standard", &LatencyModel::standard_read, &LatencyModel::standard_write,
                   &PriceSheet::standard);
    AddStorageKeys(k, "s3.hot", &LatencyModel::hot_read, &LatencyModel::hot_write, &PriceSheet::hot);
    k.push_back(NumberKey("s3.retention_hours", "storage cost accrual per put (assumption)",
                          [](SimConfig& c) -> double& { return c.storage_retention_hours; }));
    AddStorageKeys(k, "kv", &LatencyModel::kv_read, &LatencyModel::kv_write, &PriceSheet::kv);
    k.push_back(LatencyKey("queue.send", "ms (assumption)", &LatencyModel::queue_send));
    k.push_back(LatencyKey("queue.receive", "ms (assumption)", &LatencyModel::queue_receive));
    k.push_back(NumberKey("queue.request_price", "cents per million API calls (assumption)",
                          [](SimConfig& c) -> double& { return c.prices.queue_per_million; }));
    k.push_back({"compute.mode", "modeled | measured",
                 [](SimConfig& c, const std::string& v) {
                   if (v == "modeled") {
                     c.compute.mode = ComputeMode::kModeled;
                   } else if (v == "measured") {
                     c.compute.mode = ComputeMode::kMeasured;
                   } else {
                     Fail(ErrorCode::kInvalidArgument, "compute.mode must be modeled or measured");
                   }
                 },
                 [](const SimConfig& c) {
                   return std::string(c.compute.mode == ComputeMode::kModeled ? "modeled" : "measured");
                 }});
    k.push_back(NumberKey("compute.calibration", "simulated seconds per measured or modeled second",
                          [](SimConfig& c) -> double& { return c.compute.calibration; }));
    k.push_back(NumberKey("compute.ns_per_row", "modeled cost per operator row",
                          [](SimConfig& c) -> double& { return c.compute.ns_per_row; }));
    k.push_back(NumberKey("compute.ns_per_byte", "modeled cost per decoded byte",
                          [](SimConfig& c) -> double& { return c.compute.ns_per_byte; }));
    k.push_back(NumberKey("fault.straggler_fraction", "probability",
                          [](SimConfig& c) -> double& { return c.faults.straggler_fraction; }));
    k.push_back(NumberKey("fault.straggler_slowdown", "multiplicative factor >= 1",
                          [](SimConfig& c) -> double& { return c.faults.straggler_slowdown; }));
    k.push_back(NumberKey("fault.crash_fraction", "probability",
                          [](SimConfig& c) -> double& { return c.faults.crash_fraction; }));
    k.push_back(NumberKey("fault.queue_duplicate_fraction", "probability of redelivering a received message",
                          [](SimConfig& c) -> double& { return c.faults.queue_duplicate_fraction; }));
    k.push_back({"fault.scope", "comma list of invocation, storage_request",
                 [](SimConfig& c, const std::string& v) {
                   c.faults.affect_invocations = false;
                   c.faults.affect_storage_requests = false;
                   std::istringstream in(v);
                   std::string item;
                   while (std::getline(in, item, ',')) {
                     item = Trim(item);
                     if (item == "invocation") {
                       c.faults.affect_invocations = true;
                     } else if (item == "storage_request") {
                       c.faults.affect_storage_requests = true;
                     } else if (!item.empty()) {
                       Fail(ErrorCode::kInvalidArgument, "unknown fault scope '" + item + "'");
                     }
                   }
                 },
                 [](const SimConfig& c) {
                   std::string scope;
                   if (c.faults.affect_invocations) scope = "invocation";
                   if (c.faults.affect_storage_requests) scope += scope.empty() ? "storage_request" : ",storage_request";
                   return scope;
                 }});
    k.push_back({"fault.seed", "fault injection seed",
                 [](SimConfig& c, const std::string& v) {
                   c.faults.rng_seed = ParseUnsigned("fault.seed", v);
                 },
                 [](const SimConfig& c) { return std::to_string(c.faults.rng_seed); }});
    return k;
  }();
  return keys;
}

}  // namespace

SimConfig SimConfig::Parse(const std::string& text, SimConfig base) {
  std::istringstream in(text);
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto equals = line.find('=');
    if (equals == std::string::npos) {
      Fail(ErrorCode::kInvalidArgument, "config line " + std::to_string(line_number) + ": expected key = value");
    }
    const auto key = Trim(line.substr(0, equals));
    const auto value = Trim(line.substr(equals + 1));
    bool matched = false;
    for (const auto& entry : Keys()) {
      if (entry.key == key) {
        entry.set(base, value);
        matched = true;
        break;
      }
    }
    if (!matched) {
      Fail(ErrorCode::kInvalidArgument, "config line " + std::to_string(line_number) + ": unknown key '" + key + "'");
    }
  }
  base.faults.Validate();
  return base;
}

SimConfig SimConfig::LoadFile(const std::filesystem::path& path, SimConfig base) {
  std::ifstream in(path);
  if (!in) {
    Fail(ErrorCode::kInvalidArgument, "cannot open config file " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str(), std::move(base));
}

std::string SimConfig::ToConfigText() const {
  std::ostringstream out;
  for (const auto& entry : Keys()) {
    out << entry.key << " = " << entry.get(*this) << "  # " << entry.comment << "\n";
  }
  return out.str();
}

}  // namespace skylite
