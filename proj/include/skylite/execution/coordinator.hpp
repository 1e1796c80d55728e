#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "skylite/execution/registry.hpp"
#include "skylite/optimizer/physical_planner.hpp"
#include "skylite/sim/simulator.hpp"
#include "skylite/storage/catalog.hpp"

namespace skylite {

constexpr const char* kIntermediateBucket = "skylite-intermediate";
constexpr const char* kQueryTable = "skylite-queries";

struct RetryPolicy {
  // A fragment is overdue after max(floor, factor x median fragment runtime of its stage).
  double straggler_factor = 2.0;
  SimTime straggler_floor = Millis(500);
  int max_attempts = 3;
  // Overdue fragments whose input exceeds this multiple of the stage's median input are split, not retried.
  double skew_ratio = 4.0;
};

struct QueryOptions {
  // Consult the result registry before executing (results and checkpoints are always registered).
  bool use_cache = true;
  PlannerOptions planner;
  RetryPolicy retry;
  // Stages with more fragments than this use two-level invocation.
  int two_level_threshold = 64;
  SimTime poll_interval = Millis(100);
  int worker_memory_mib = 2048;
  // Per-worker operator state budget; 0 means half of the worker memory.
  uint64_t memory_budget_bytes = 0;
  // Memory size at which the coordinator's lifetime is billed.
  int coordinator_memory_mib = 2048;
  size_t io_parallelism = 8;
  bool io_retrigger = true;
  std::string intermediate_bucket = kIntermediateBucket;
  std::string registry_table = kDefaultRegistryTable;
  // Query ids start with this prefix; processes sharing persisted state should use distinct prefixes.
  std::string query_id_prefix = "q";
  // Test hook: aborts the query once this many stages have completed.
  std::optional<int> abort_after_stages;
};

struct StageReport {
  int pipeline_id = 0;
  int fragments = 0;
  bool cache_hit = false;
  // Fragment executions requested: one per fragment plus one per retrigger and split part.
  int invocations = 0;
  int roots = 0;
  int retriggers = 0;
  int splits = 0;
  // Invocations submitted by the coordinator itself (roots, direct fragments, retriggers).
  std::vector<InvocationId> submitted;
  SimTime start = 0;
  SimTime end = 0;
  uint64_t bytes_read = 0;
  uint64_t bytes_written = 0;
  uint64_t rows_out = 0;
  uint64_t requests = 0;
};

struct QueryResult {
  std::string query_id;
  std::string sql;
  std::string cache_key;
  Schema schema;
  // Final result location: objects in order, their concatenation is the result.
  std::string bucket;
  std::vector<std::string> result_keys;
  SimTime submit_time = 0;
  SimTime end_time = 0;
  bool result_cache_hit = false;
  std::vector<StageReport> stages;
  PhysicalQueryPlan plan;

  SimTime Latency() const { return end_time - submit_time; }
  int Invocations() const;
  int Retriggers() const;
  uint64_t BytesScanned() const;
  nlohmann::json LocationJson() const;
};

// Runs queries against a shared simulator: one event-driven state machine per query that schedules the
// pipeline DAG stage by stage, tracks fragments through the response queue, retries stragglers and failed
// fragments, consults and fills the result registry, and bills its own lifetime as compute.
class Coordinator {
 public:
  Coordinator(Simulator& sim, const Catalog& catalog, QueryOptions options = {});
  ~Coordinator();

  const QueryOptions& Options() const { return options_; }
  ResultRegistry& Registry() { return registry_; }

  // Compile errors propagate before anything is invoked; unrecoverable execution failures throw QueryAborted.
  QueryResult Run(const std::string& sql);
  // Independent concurrent queries; throws the first failure after all of them ended.
  std::vector<QueryResult> RunConcurrent(const std::vector<std::string>& sqls);
  // Re-plans a previously started query and executes only the pipelines without a registered checkpoint.
  QueryResult Resume(const std::string& query_id);
  // {"query": "..."} -> result location.
  nlohmann::json HandleRequest(const std::string& envelope);

 private:
  class Execution;
  std::vector<QueryResult> Drive(std::vector<std::unique_ptr<Execution>> executions);
  std::unique_ptr<Execution> Prepare(const std::string& sql, std::string query_id, bool resume);
  std::string NextQueryId(const std::string& sql);

  Simulator& sim_;
  const Catalog& catalog_;
  QueryOptions options_;
  ResultRegistry registry_;
  uint64_t sequence_ = 0;
};

}  // namespace skylite
