#include "skylite/execution/coordinator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <set>

#include "skylite/common/errors.hpp"
#include "skylite/common/hashing.hpp"
#include "skylite/execution/worker.hpp"
#include "skylite/optimizer/cache_key.hpp"
#include "skylite/optimizer/fragment_spec.hpp"
#include "skylite/sql/binder.hpp"

namespace skylite {

using nlohmann::json;

namespace {

template <typename T>
T Median(std::vector<T> values) {
  if (values.empty()) return T{};
  const size_t middle = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(middle), values.end());
  return values[middle];
}

TableBytes StatsOf(const Catalog& catalog) {
  TableBytes stats;
  for (const auto& name : catalog.TableNames()) stats[name] = catalog.Resolve(name).TotalBytes();
  return stats;
}

// Contiguous balanced slices: the first (W mod r) slices get one extra fragment.
std::vector<size_t> SliceSizes(size_t fragments, size_t roots) {
  std::vector<size_t> sizes(roots, fragments / roots);
  for (size_t i = 0; i < fragments % roots; ++i) ++sizes[i];
  return sizes;
}

std::string JoinModeName(JoinMode mode) { return mode == JoinMode::kBroadcast ? "broadcast" : "repartition"; }

}  // namespace

int QueryResult::Invocations() const {
  int total = 0;
  for (const auto& stage : stages) total += stage.invocations;
  return total;
}

int QueryResult::Retriggers() const {
  int total = 0;
  for (const auto& stage : stages) total += stage.retriggers;
  return total;
}

uint64_t QueryResult::BytesScanned() const {
  uint64_t total = 0;
  for (const auto& stage : stages) {
    if (!plan.pipelines.empty() && plan.Pipeline(stage.pipeline_id).Source().kind == PhysOpKind::kScan) {
      total += stage.bytes_read;
    }
  }
  return total;
}

json QueryResult::LocationJson() const {
  return json{{"query_id", query_id},
              {"bucket", bucket},
              {"result_keys", result_keys},
              {"latency_ms", ToMillis(Latency())},
              {"cache_hit", result_cache_hit}};
}

class Coordinator::Execution {
 public:
  Execution(Simulator& sim, const Catalog& catalog, QueryOptions options, std::string query_id, std::string sql,
            bool resume, uint64_t run_number)
      : sim_(sim),
        catalog_(catalog),
        options_(std::move(options)),
        registry_(sim, options_.registry_table),
        resume_(resume),
        rng_(sim.Config().seed ^ StableHash64(query_id + "#" + std::to_string(run_number))) {
    result_.query_id = std::move(query_id);
    result_.sql = std::move(sql);
    response_queue_ = "responses/" + result_.query_id + "/" + std::to_string(run_number);
    failure_queue_ = "failures/" + result_.query_id + "/" + std::to_string(run_number);
    Compile();
  }

  void Start() {
    const SimTime now = sim_.Now();
    result_.submit_time = now;
    invoke_clock_ = now;
    RecordStatus(now, "running");
    SimTime ready = now;
    if (options_.use_cache || resume_) {
      SimTime latency = 0;
      const auto entry = registry_.Lookup(Context(now), ResultRegistryKey(result_.cache_key), &latency);
      ready = now + latency;
      if (entry) {
        result_.result_cache_hit = true;
        result_.bucket = entry->bucket;
        result_.result_keys = entry->OutputKeys();
        for (auto& stage : stages_) {
          stage.status = Status::kComplete;
          stage.report.cache_hit = true;
          stage.report.start = now;
          stage.report.end = ready;
        }
        sim_.Schedule(ready, [this]() { Finish(sim_.Now()); });
        return;
      }
    }
    sim_.Schedule(ready, [this]() { Advance(sim_.Now()); });
    sim_.Schedule(now + options_.poll_interval, [this]() { Poll(sim_.Now()); });
  }

  bool Done() const { return done_; }

  QueryResult TakeResult() {
    if (error_) std::rethrow_exception(error_);
    return std::move(result_);
  }

 private:
  enum class Status { kBlocked, kRunning, kComplete };

  struct Fragment {
    FragmentSpec spec;
    // Original position; selects the partition an exchange input reads.
    int partition = 0;
    uint64_t input_bytes = 0;
    int attempts = 0;
    int failures = 0;
    SimTime first_submit = 0;
    SimTime last_submit = 0;
    bool done = false;
    bool superseded = false;
    std::vector<std::string> outputs;
  };

  struct Stage {
    Status status = Status::kBlocked;
    std::map<int, Fragment> fragments;
    // Fragment ids in output order; a split fragment is replaced by its parts.
    std::vector<int> order;
    int next_id = 0;
    std::string checkpoint_key;
    std::string bucket;
    std::vector<std::vector<std::string>> outputs;
    std::vector<SimTime> runtimes;
    StageReport report;
  };

  RequestContext Context(SimTime at) const { return {at, result_.query_id}; }

  void Compile() {
    const TableBytes stats = StatsOf(catalog_);
    const LogicalPlan logical = OptimizeLogical(BindSql(result_.sql, catalog_), stats);
    result_.cache_key = ResultCacheKey(logical);
    result_.plan = PlanPhysical(logical, stats, options_.planner);
    result_.schema = result_.plan.pipelines.back().Sink().output_schema;
    stages_.resize(result_.plan.pipelines.size());
    for (const auto& pipeline : result_.plan.pipelines) {
      auto& stage = stages_[static_cast<size_t>(pipeline.id)];
      std::vector<std::string> dependency_keys;
      for (int dependency : pipeline.dependencies) {
        dependency_keys.push_back(stages_[static_cast<size_t>(dependency)].checkpoint_key);
      }
      stage.checkpoint_key = CheckpointRegistryKey(result_.cache_key, pipeline.ToJson().dump(), dependency_keys);
      stage.report.pipeline_id = pipeline.id;
      stage.report.fragments = pipeline.fragment_count;
    }
  }

  void RecordStatus(SimTime at, const std::string& status) {
    json record{{"sql", result_.sql}, {"status", status}, {"use_cache", options_.use_cache}};
    if (options_.planner.force_workers) record["force_workers"] = *options_.planner.force_workers;
    if (options_.planner.force_join_mode) record["force_join_mode"] = JoinModeName(*options_.planner.force_join_mode);
    sim_.KvPut(Context(at), kQueryTable, result_.query_id, record.dump());
  }

  // Launches every blocked pipeline whose inputs are complete.
  void Advance(SimTime now) {
    if (done_) return;
    for (const auto& pipeline : result_.plan.pipelines) {
      auto& stage = stages_[static_cast<size_t>(pipeline.id)];
      if (stage.status != Status::kBlocked) continue;
      const bool ready = std::all_of(pipeline.dependencies.begin(), pipeline.dependencies.end(), [&](int d) {
        return stages_[static_cast<size_t>(d)].status == Status::kComplete;
      });
      if (ready) Launch(pipeline, now);
      if (done_) return;
    }
  }

  void Launch(const PipelinePlan& pipeline, SimTime now) {
    auto& stage = stages_[static_cast<size_t>(pipeline.id)];
    stage.status = Status::kRunning;
    stage.report.start = now;
    if (options_.use_cache || resume_) {
      SimTime latency = 0;
      if (const auto entry = registry_.Lookup(Context(now), stage.checkpoint_key, &latency)) {
        stage.status = Status::kComplete;
        stage.report.cache_hit = true;
        stage.report.end = now + latency;
        stage.bucket = entry->bucket;
        stage.outputs = entry->fragments;
        if (pipeline.id == result_.plan.SinkId()) {
          sim_.Schedule(now + latency, [this]() { Finish(sim_.Now()); });
        } else {
          sim_.Schedule(now + latency, [this]() { Advance(sim_.Now()); });
        }
        return;
      }
      now += latency;
    }

    const int count = pipeline.fragment_count;
    std::vector<ScanAssignment> assignments;
    if (pipeline.Source().kind == PhysOpKind::kScan) {
      assignments = FragmentizeScan(catalog_.Resolve(pipeline.Source().table), count);
    }
    for (int id = 0; id < count; ++id) {
      Fragment fragment;
      fragment.partition = id;
      fragment.spec = BaseSpec(pipeline, id);
      if (!assignments.empty()) fragment.spec.scan = assignments[static_cast<size_t>(id)];
      fragment.spec.exchange_inputs = ExchangeInputs(pipeline, id);
      fragment.input_bytes = InputBytes(fragment.spec);
      stage.fragments.emplace(id, std::move(fragment));
      stage.order.push_back(id);
    }
    stage.next_id = count;

    if (count > options_.two_level_threshold) {
      const size_t roots = static_cast<size_t>(std::ceil(std::sqrt(static_cast<double>(count))));
      size_t offset = 0;
      for (const size_t size : SliceSizes(static_cast<size_t>(count), roots)) {
        std::vector<int> slice;
        for (size_t i = 0; i < size; ++i) slice.push_back(static_cast<int>(offset + i));
        offset += size;
        SubmitRoot(stage, slice, now);
      }
    } else {
      for (int id = 0; id < count; ++id) SubmitDirect(stage, stage.fragments.at(id), now);
    }
  }

  FragmentSpec BaseSpec(const PipelinePlan& pipeline, int id) const {
    FragmentSpec spec;
    spec.query_id = result_.query_id;
    spec.pipeline_id = pipeline.id;
    spec.fragment_id = id;
    spec.fragment_count = pipeline.fragment_count;
    spec.operators = pipeline.operators;
    spec.intermediate_bucket = options_.intermediate_bucket;
    spec.memory_mib = options_.worker_memory_mib;
    spec.memory_budget_bytes = options_.memory_budget_bytes > 0
                                   ? options_.memory_budget_bytes
                                   : static_cast<uint64_t>(options_.worker_memory_mib) * kMiB / 2;
    spec.response_queue = response_queue_;
    spec.io_parallelism = options_.io_parallelism;
    spec.io_retrigger = options_.io_retrigger;
    return spec;
  }

  // Producers with one partition are read whole by every consumer fragment (gathers and broadcasts); otherwise
  // a consumer fragment reads its own partition of every producer fragment.
  std::map<int, std::vector<std::string>> ExchangeInputs(const PipelinePlan& pipeline, int partition) const {
    std::map<int, std::vector<std::string>> inputs;
    for (int dependency : pipeline.dependencies) {
      const auto& producer = stages_[static_cast<size_t>(dependency)];
      if (producer.bucket != options_.intermediate_bucket) {
        Fail(ErrorCode::kInternal, "pipeline " + std::to_string(dependency) + " output lives in bucket " +
                                       producer.bucket);
      }
      const int partitions = result_.plan.Pipeline(dependency).Sink().partition_count;
      auto& keys = inputs[dependency];
      for (const auto& fragment : producer.outputs) {
        keys.push_back(fragment.at(partitions == 1 ? 0 : static_cast<size_t>(partition)));
      }
    }
    return inputs;
  }

  uint64_t InputBytes(const FragmentSpec& spec) const {
    uint64_t bytes = spec.scan.bytes;
    for (const auto& [pipeline, keys] : spec.exchange_inputs) {
      for (const auto& key : keys) {
        if (const auto object = sim_.PeekObject(spec.intermediate_bucket, key)) bytes += object->bytes->size();
      }
    }
    return bytes;
  }

  // The coordinator issues invoke calls one after another.
  SimTime NextInvokeTime(SimTime now) {
    invoke_clock_ = std::max(invoke_clock_, now) + sim_.Config().latency.invoke_request.Sample(rng_);
    return invoke_clock_;
  }

  InvocationId Invoke(std::string payload, SimTime at) {
    InvokeOptions invoke;
    invoke.at = at;
    invoke.tag = result_.query_id;
    invoke.failure_queue = failure_queue_;
    return sim_.Invoke(WorkerFunction(options_.worker_memory_mib), std::move(payload), WorkerMain, invoke);
  }

  void NoteAttempt(Stage& stage, Fragment& fragment, SimTime at) {
    if (fragment.attempts == 0) fragment.first_submit = at;
    ++fragment.attempts;
    fragment.last_submit = at;
    ++stage.report.invocations;
  }

  void SubmitDirect(Stage& stage, Fragment& fragment, SimTime now) {
    const SimTime at = NextInvokeTime(now);
    NoteAttempt(stage, fragment, at);
    stage.report.submitted.push_back(Invoke(FragmentPayload(fragment.spec), at));
  }

  void SubmitRoot(Stage& stage, const std::vector<int>& slice, SimTime now) {
    std::vector<FragmentSpec> specs;
    for (int id : slice) specs.push_back(stage.fragments.at(id).spec);
    const SimTime at = NextInvokeTime(now);
    InvocationId root = kNoInvocation;
    try {
      root = Invoke(RootPayload(specs, failure_queue_), at);
    } catch (const SkyliteError& error) {
      if (error.Code() != ErrorCode::kPayloadTooLarge) throw;
      // The slice does not fit one payload: invoke its members directly.
      for (int id : slice) SubmitDirect(stage, stage.fragments.at(id), now);
      return;
    }
    ++stage.report.roots;
    stage.report.submitted.push_back(root);
    for (int id : slice) NoteAttempt(stage, stage.fragments.at(id), at);
  }

  void Poll(SimTime now) {
    if (done_) return;
    Drain(response_queue_, now, [&](const std::string& body) { HandleResponse(body, now); });
    if (done_) return;
    Drain(failure_queue_, now, [&](const std::string& body) { HandleCrash(body, now); });
    if (done_) return;
    CheckStragglers(now);
    if (done_) return;
    sim_.Schedule(now + options_.poll_interval, [this]() { Poll(sim_.Now()); });
  }

  template <typename Handle>
  void Drain(const std::string& queue, SimTime now, Handle&& handle) {
    for (;;) {
      const auto messages = sim_.ReceiveMessages(Context(now), queue, 10);
      if (messages.empty()) return;
      for (const auto& message : messages) {
        handle(message.body);
        if (done_) return;
      }
    }
  }

  Fragment* Find(int pipeline, int id) {
    if (pipeline < 0 || static_cast<size_t>(pipeline) >= stages_.size()) return nullptr;
    auto& stage = stages_[static_cast<size_t>(pipeline)];
    if (stage.status != Status::kRunning) return nullptr;
    const auto it = stage.fragments.find(id);
    if (it == stage.fragments.end() || it->second.done || it->second.superseded) return nullptr;
    return &it->second;
  }

  void HandleResponse(const std::string& body, SimTime now) {
    WorkerResponse response;
    try {
      response = WorkerResponse::Deserialize(body);
    } catch (const SkyliteError&) {
      return;
    }
    if (response.query_id != result_.query_id) return;
    // At-least-once delivery: one message per attempt counts.
    if (!seen_responses_.insert(response.invocation).second) return;
    Fragment* fragment = Find(response.pipeline_id, response.fragment_id);
    if (!fragment) return;
    auto& stage = stages_[static_cast<size_t>(response.pipeline_id)];
    const std::string where =
        "pipeline " + std::to_string(response.pipeline_id) + " fragment " + std::to_string(response.fragment_id);
    switch (response.failure) {
      case FailureClass::kNone:
        fragment->done = true;
        fragment->outputs = response.output_keys;
        stage.runtimes.push_back(now - fragment->first_submit);
        stage.report.bytes_read += response.stats.bytes_read;
        stage.report.bytes_written += response.stats.bytes_written;
        stage.report.rows_out += response.stats.rows_out;
        stage.report.requests += response.stats.requests;
        CheckComplete(response.pipeline_id, now);
        return;
      case FailureClass::kCodeError:
        Abort("code_error in " + where + ": " + response.error, now);
        return;
      case FailureClass::kDataSkew:
        ++fragment->failures;
        if (!Split(stage, *fragment, now)) Abort("data_skew in " + where + " cannot be split: " + response.error, now);
        return;
      case FailureClass::kTransient:
        ++fragment->failures;
        Recover(stage, *fragment, where, now);
        return;
    }
  }

  void HandleCrash(const std::string& body, SimTime now) {
    const json notice = json::parse(body, nullptr, false);
    if (!notice.is_object() || !notice.contains("invocation_failed") || !notice.contains("payload")) return;
    if (!seen_crashes_.insert(notice["invocation_failed"].get<InvocationId>()).second) return;
    // A crashed root takes its whole slice down; re-invoke the unacknowledged members directly.
    for (const auto& [pipeline, id] : PayloadFragments(notice["payload"].get<std::string>())) {
      Fragment* fragment = Find(pipeline, id);
      if (!fragment) continue;
      ++fragment->failures;
      Recover(stages_[static_cast<size_t>(pipeline)], *fragment,
              "pipeline " + std::to_string(pipeline) + " fragment " + std::to_string(id), now);
      if (done_) return;
    }
  }

  // Retries a fragment with no attempt left in flight, or aborts when its attempts are exhausted.
  void Recover(Stage& stage, Fragment& fragment, const std::string& where, SimTime now) {
    if (fragment.attempts - fragment.failures > 0) return;
    if (fragment.attempts >= options_.retry.max_attempts) {
      Abort("transient-exhausted: " + where + " failed " + std::to_string(fragment.attempts) + " attempts", now);
      return;
    }
    ++stage.report.retriggers;
    SubmitDirect(stage, fragment, now);
  }

  bool Split(Stage& stage, Fragment& fragment, SimTime now) {
    if (fragment.spec.scan.objects.empty()) return false;
    const auto& table = catalog_.Resolve(result_.plan.Pipeline(fragment.spec.pipeline_id).Source().table);
    const auto parts = SplitAssignment(fragment.spec.scan, table, 2);
    if (parts.size() < 2 || std::any_of(parts.begin(), parts.end(), [](const auto& p) { return p.objects.empty(); })) {
      return false;
    }
    fragment.superseded = true;
    const int original = fragment.spec.fragment_id;
    std::vector<int> ids;
    for (const auto& part : parts) {
      Fragment sub;
      sub.partition = fragment.partition;
      sub.spec = fragment.spec;
      sub.spec.fragment_id = stage.next_id++;
      sub.spec.scan = part;
      sub.input_bytes = part.bytes;
      ids.push_back(sub.spec.fragment_id);
      stage.fragments.emplace(sub.spec.fragment_id, std::move(sub));
    }
    const auto position = std::find(stage.order.begin(), stage.order.end(), original);
    const auto inserted = stage.order.erase(position);
    stage.order.insert(inserted, ids.begin(), ids.end());
    ++stage.report.splits;
    for (int id : ids) SubmitDirect(stage, stage.fragments.at(id), now);
    return true;
  }

  // Runtime reference before any fragment of the stage finished: a cold start plus the modeled transfer and
  // processing of the fragment's input.
  SimTime EstimateRuntime(const Fragment& fragment) const {
    const auto& config = sim_.Config();
    const double bytes = static_cast<double>(fragment.input_bytes);
    const double transfer_s = bytes / (config.function_net_gbps * 1e9 / 8.0);
    const double vcpus = std::max(1.0, WorkerFunction(options_.worker_memory_mib).Vcpus());
    // Stored bytes decode to a few times their size; every decoded value passes a handful of operators.
    const double compute_ns =
        bytes * 4.0 * (config.compute.ns_per_byte + config.compute.ns_per_row / 8.0) * config.compute.calibration;
    return Millis(config.latency.cold_start.median_ms + 4 * config.latency.standard_read.median_ms) +
           Seconds(transfer_s) + static_cast<SimTime>(compute_ns / vcpus / 1000.0);
  }

  void CheckStragglers(SimTime now) {
    for (auto& stage : stages_) {
      if (stage.status != Status::kRunning || stage.order.empty()) continue;
      std::vector<uint64_t> inputs;
      for (int id : stage.order) inputs.push_back(stage.fragments.at(id).input_bytes);
      const uint64_t median_input = Median(inputs);
      const bool finished_any = !stage.runtimes.empty();
      const SimTime median_runtime = Median(stage.runtimes);
      const std::vector<int> order = stage.order;
      for (int id : order) {
        auto& fragment = stage.fragments.at(id);
        if (fragment.done || fragment.superseded || fragment.attempts - fragment.failures <= 0) continue;
        if (fragment.attempts >= options_.retry.max_attempts) continue;
        const SimTime reference = finished_any ? median_runtime : EstimateRuntime(fragment);
        const SimTime threshold = std::max(
            options_.retry.straggler_floor,
            static_cast<SimTime>(options_.retry.straggler_factor * static_cast<double>(reference)));
        if (now - fragment.last_submit <= threshold) continue;
        const bool skewed = median_input > 0 && static_cast<double>(fragment.input_bytes) >
                                                    options_.retry.skew_ratio * static_cast<double>(median_input);
        if (skewed && Split(stage, fragment, now)) continue;
        ++stage.report.retriggers;
        SubmitDirect(stage, fragment, now);
      }
    }
  }

  void CheckComplete(int pipeline, SimTime now) {
    auto& stage = stages_[static_cast<size_t>(pipeline)];
    for (int id : stage.order) {
      if (!stage.fragments.at(id).done) return;
    }
    stage.status = Status::kComplete;
    stage.report.end = now;
    stage.bucket = options_.intermediate_bucket;
    stage.outputs.clear();
    for (int id : stage.order) stage.outputs.push_back(stage.fragments.at(id).outputs);

    RegistryEntry entry;
    entry.cache_key = result_.cache_key;
    entry.pipeline_id = pipeline;
    entry.bucket = stage.bucket;
    entry.fragments = stage.outputs;
    entry.created_at = now;
    entry.creator_query = result_.query_id;
    SimTime ready = now + registry_.Register(Context(now), stage.checkpoint_key, entry);
    ++completed_stages_;
    if (options_.abort_after_stages && completed_stages_ >= *options_.abort_after_stages &&
        pipeline != result_.plan.SinkId()) {
      Abort("forced abort after " + std::to_string(completed_stages_) + " completed stages", ready);
      return;
    }
    if (pipeline == result_.plan.SinkId()) {
      ready += registry_.Register(Context(ready), ResultRegistryKey(result_.cache_key), entry);
      sim_.Schedule(ready, [this]() { Finish(sim_.Now()); });
      return;
    }
    sim_.Schedule(ready, [this]() { Advance(sim_.Now()); });
  }

  void CollectReports() {
    result_.stages.clear();
    for (const auto& stage : stages_) result_.stages.push_back(stage.report);
  }

  void Close(SimTime now, const std::string& status) {
    done_ = true;
    result_.end_time = now;
    CollectReports();
    sim_.BillCompute(Context(result_.submit_time), options_.coordinator_memory_mib, now - result_.submit_time);
    RecordStatus(now, status);
  }

  void Finish(SimTime now) {
    if (done_) return;
    if (!result_.result_cache_hit) {
      const auto& sink = stages_.back();
      result_.bucket = sink.bucket;
      result_.result_keys.clear();
      for (const auto& fragment : sink.outputs) result_.result_keys.push_back(fragment.at(0));
    }
    Close(now, "complete");
  }

  void Abort(const std::string& reason, SimTime now) {
    if (done_) return;
    error_ = std::make_exception_ptr(SkyliteError(ErrorCode::kQueryAborted, reason));
    Close(now, "aborted");
  }

  Simulator& sim_;
  const Catalog& catalog_;
  QueryOptions options_;
  ResultRegistry registry_;
  bool resume_;
  Rng rng_;
  std::string response_queue_;
  std::string failure_queue_;
  QueryResult result_;
  std::vector<Stage> stages_;
  SimTime invoke_clock_ = 0;
  int completed_stages_ = 0;
  std::set<InvocationId> seen_responses_;
  std::set<InvocationId> seen_crashes_;
  bool done_ = false;
  std::exception_ptr error_;
};

Coordinator::Coordinator(Simulator& sim, const Catalog& catalog, QueryOptions options)
    : sim_(sim), catalog_(catalog), options_(std::move(options)), registry_(sim, options_.registry_table) {}

Coordinator::~Coordinator() = default;

std::string Coordinator::NextQueryId(const std::string& sql) {
  const uint64_t sequence = sequence_++;
  const std::string digest = Sha256Hex(sql + "#" + std::to_string(sim_.Now()) + "#" + std::to_string(sequence));
  return options_.query_id_prefix + std::to_string(sim_.Now()) + "-" + std::to_string(sequence) + "-" + digest.substr(0, 8);
}

std::unique_ptr<Coordinator::Execution> Coordinator::Prepare(const std::string& sql, std::string query_id,
                                                             bool resume) {
  QueryOptions options = options_;
  if (resume) options.abort_after_stages.reset();
  return std::make_unique<Execution>(sim_, catalog_, std::move(options), std::move(query_id), sql, resume,
                                     sequence_++);
}

std::vector<QueryResult> Coordinator::Drive(std::vector<std::unique_ptr<Execution>> executions) {
  for (auto& execution : executions) execution->Start();
  sim_.RunUntil([&]() {
    return std::all_of(executions.begin(), executions.end(), [](const auto& e) { return e->Done(); });
  });
  // Outstanding attempts (stragglers, duplicates) run to completion so their cost lands before reporting.
  sim_.RunUntilIdle();
  std::vector<QueryResult> results;
  std::exception_ptr first_error;
  for (auto& execution : executions) {
    try {
      results.push_back(execution->TakeResult());
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

QueryResult Coordinator::Run(const std::string& sql) { return RunConcurrent({sql}).front(); }

std::vector<QueryResult> Coordinator::RunConcurrent(const std::vector<std::string>& sqls) {
  std::vector<std::unique_ptr<Execution>> executions;
  for (const auto& sql : sqls) executions.push_back(Prepare(sql, NextQueryId(sql), false));
  return Drive(std::move(executions));
}

QueryResult Coordinator::Resume(const std::string& query_id) {
  const auto record = sim_.KvGet({sim_.Now(), query_id}, kQueryTable, query_id);
  if (!record.value) Fail(ErrorCode::kInvalidArgument, "no record of query " + query_id);
  const json parsed = json::parse(*record.value);
  const QueryOptions saved = options_;
  options_.use_cache = parsed.value("use_cache", options_.use_cache);
  if (parsed.contains("force_workers")) options_.planner.force_workers = parsed["force_workers"].get<int>();
  if (parsed.contains("force_join_mode")) {
    options_.planner.force_join_mode =
        parsed["force_join_mode"] == "broadcast" ? JoinMode::kBroadcast : JoinMode::kRepartition;
  }
  std::vector<std::unique_ptr<Execution>> executions;
  try {
    executions.push_back(Prepare(parsed.at("sql").get<std::string>(), query_id, true));
  } catch (...) {
    options_ = saved;
    throw;
  }
  options_ = saved;
  return Drive(std::move(executions)).front();
}

json Coordinator::HandleRequest(const std::string& envelope) {
  const json request = json::parse(envelope, nullptr, false);
  if (!request.is_object() || !request.contains("query") || !request["query"].is_string()) {
    Fail(ErrorCode::kInvalidArgument, "request must be {\"query\": \"...\"}");
  }
  return Run(request["query"].get<std::string>()).LocationJson();
}

}  // namespace skylite
