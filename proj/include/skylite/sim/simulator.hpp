#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "skylite/sim/cost_ledger.hpp"
#include "skylite/sim/sim_config.hpp"
#include "skylite/sim/sim_types.hpp"

namespace skylite {

class Simulator;
class WorkerContext;

using InvocationId = uint64_t;
constexpr InvocationId kNoInvocation = 0;

struct FunctionSpec {
  std::string name;
  int memory_mib = 2048;

  // Memory-proportional, interpolated over the published [0.07, 5.79] vCPU range.
  double Vcpus() const;
  void Validate() const;
};

enum class StartKind { kCold, kWarm };
enum class InvocationState { kPending, kRunning, kFinished, kFailed, kStraggling };

std::string_view InvocationStateName(InvocationState state);

struct InvocationRecord {
  InvocationId id = kNoInvocation;
  InvocationId parent = kNoInvocation;
  std::string function;
  StartKind start_kind = StartKind::kCold;
  InvocationState state = InvocationState::kPending;
  SimTime submit_time = 0;
  SimTime start_time = 0;
  SimTime end_time = 0;
  size_t payload_bytes = 0;
  // Fault injection outcome.
  bool straggler = false;
  bool crashed = false;
  std::string tag;
};

using WorkerEntrypoint = std::function<void(WorkerContext&)>;

struct InvokeOptions {
  // Submission time; defaults to the current simulated time.
  std::optional<SimTime> at;
  InvocationId parent = kNoInvocation;
  std::string tag;
  // Receives {"invocation_failed": id, "payload": ...} when the invocation crashes.
  std::string failure_queue;
};

// Where and on whose bill a request happens.
struct RequestContext {
  SimTime at = 0;
  std::string tag;
};

struct PutReceipt {
  bool failed = false;
  SimTime latency = 0;
};

constexpr uint64_t kToEnd = UINT64_MAX;

struct GetResult {
  // Injected transient failure (RequestFailed); `first_byte_latency` is then the time until the error.
  bool failed = false;
  std::string data;
  SimTime first_byte_latency = 0;
  SimTime transfer_time = 0;
  uint64_t object_size = 0;
  StorageClass storage_class = StorageClass::kStandard;

  SimTime Latency() const { return first_byte_latency + transfer_time; }
};

struct StoredObject {
  std::string bucket;
  std::string key;
  std::shared_ptr<const std::string> bytes;
  StorageClass storage_class = StorageClass::kStandard;
  SimTime created_at = 0;
};

struct KvGetResult {
  std::optional<std::string> value;
  SimTime latency = 0;
};

struct QueueMessage {
  std::string queue;
  std::string body;
  SimTime enqueue_time = 0;
};

enum class SimEventKind {
  kInvokeSubmit,
  kInvokeStart,
  kInvokeEnd,
  kInvokeCrash,
  kPut,
  kGet,
  kList,
  kSend,
  kReceive,
  kKvRead,
  kKvWrite,
};

std::string_view SimEventKindName(SimEventKind kind);

struct SimEvent {
  SimTime time = 0;
  SimEventKind kind = SimEventKind::kInvokeSubmit;
  InvocationId invocation = kNoInvocation;
  InvocationId parent = kNoInvocation;
  std::string detail;
  std::string tag;
};

// Runtime handle passed to a function body. Local time advances as the body issues requests and computes;
// a straggling invocation's local time is stretched by its slowdown when mapped onto the timeline.
class WorkerContext {
 public:
  Simulator& Sim() { return sim_; }
  InvocationId Id() const { return record_.id; }
  const std::string& Payload() const { return payload_; }
  const FunctionSpec& Function() const { return function_; }
  const std::string& Tag() const { return record_.tag; }
  SimTime StartTime() const { return record_.start_time; }
  double Slowdown() const { return slowdown_; }

  // Local (unstretched) time.
  SimTime Now() const { return local_now_; }
  void Advance(SimTime duration) { local_now_ += std::max<SimTime>(0, duration); }
  void AdvanceTo(SimTime local_time) { local_now_ = std::max(local_now_, local_time); }
  // Maps a local time to simulated time.
  SimTime ToSimTime(SimTime local_time) const;
  RequestContext RequestAt(SimTime local_time) const { return {ToSimTime(local_time), record_.tag}; }
  RequestContext Request() const { return RequestAt(local_now_); }

  // Asynchronous child invocation; costs one invoke API call of local time. Rethrows QuotaExceeded.
  InvocationId Invoke(const FunctionSpec& function, std::string payload, WorkerEntrypoint entrypoint,
                      const std::string& failure_queue);

 private:
  friend class Simulator;
  WorkerContext(Simulator& sim, InvocationRecord record, FunctionSpec function, std::string payload, double slowdown)
      : sim_(sim),
        record_(std::move(record)),
        function_(std::move(function)),
        payload_(std::move(payload)),
        slowdown_(slowdown),
        local_now_(record_.start_time) {}

  Simulator& sim_;
  InvocationRecord record_;
  FunctionSpec function_;
  std::string payload_;
  double slowdown_;
  SimTime local_now_;
};

// Deterministic discrete-event simulation of a function platform, object storage (two classes), a message
// queue and a key-value store, with latency sampling, fault injection and per-request cost accounting.
//
// All public operations are atomic and may be called from several threads. Event callbacks are serialized:
// at most one callback runs at a time, whichever thread drives the loop.
class Simulator {
 public:
  explicit Simulator(SimConfig config = SimConfig::Defaults());
  ~Simulator();

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  const SimConfig& Config() const { return config_; }
  // Replaces the fault plan for everything that happens from now on and reseeds the fault stream.
  void SetFaults(const FaultPlan& faults);

  // Timeline.
  SimTime Now() const;
  void Schedule(SimTime at, std::function<void()> callback);
  // Runs the next event; false when the queue is empty.
  bool Step();
  // Steps until `done` holds. Throws Internal if the queue drains first.
  void RunUntil(const std::function<bool()>& done);
  void RunUntilIdle();
  // Moves an idle clock forward (used to let sandboxes expire between runs).
  void AdvanceIdle(SimTime duration);

  // Compute.
  InvocationId Invoke(const FunctionSpec& function, std::string payload, WorkerEntrypoint entrypoint,
                      InvokeOptions options = {});
  InvocationRecord Invocation(InvocationId id) const;
  // The request payload an invocation was submitted with.
  std::string InvocationPayload(InvocationId id) const;
  std::vector<InvocationRecord> Invocations(std::optional<std::string_view> tag = std::nullopt) const;
  // Invocations whose body has not run yet.
  size_t PendingInvocations(std::string_view tag) const;
  // Bills compute not tied to an invocation record (e.g. the query coordinator).
  void BillCompute(const RequestContext& context, int memory_mib, SimTime duration);

  // Object storage.
  PutReceipt PutObject(const RequestContext& context, const std::string& bucket, const std::string& key,
                       std::string bytes, StorageClass storage_class = StorageClass::kStandard);
  // Throws NoSuchKey / RangeUnsatisfiable. `length` may be kToEnd.
  GetResult GetObjectRange(const RequestContext& context, const std::string& bucket, const std::string& key,
                           uint64_t offset, uint64_t length, bool bill_transfer = true);
  // The last `length` bytes (or the whole object when shorter).
  GetResult GetObjectSuffix(const RequestContext& context, const std::string& bucket, const std::string& key,
                            uint64_t length, bool bill_transfer = true);
  void BillTransfer(const RequestContext& context, StorageClass storage_class, uint64_t bytes, bool write);
  SimTime TransferTime(uint64_t bytes) const;
  // Lexicographic; one billed read request per 1,000 keys returned (at least one).
  std::vector<std::string> ListObjects(const RequestContext& context, const std::string& bucket,
                                       const std::string& prefix);
  void DeleteObject(const std::string& bucket, const std::string& key);
  std::optional<StoredObject> PeekObject(const std::string& bucket, const std::string& key) const;
  void CopyObjectsFrom(const Simulator& other);

  // Message queue: at-least-once, unordered.
  void SendMessage(const RequestContext& context, const std::string& queue, std::string body);
  std::vector<QueueMessage> ReceiveMessages(const RequestContext& context, const std::string& queue, size_t max_n);
  void DeleteQueue(const std::string& queue);

  // Key-value store with single-key atomic reads and writes (last writer wins).
  // Returns the request latency.
  SimTime KvPut(const RequestContext& context, const std::string& table, const std::string& key, std::string value);
  KvGetResult KvGet(const RequestContext& context, const std::string& table, const std::string& key);
  std::vector<std::pair<std::string, std::string>> KvScan(const RequestContext& context, const std::string& table);
  void KvClear(const std::string& table);

  // Accounting.
  CostLedger Ledger() const;
  double TotalCost(std::optional<CostCategory> category = std::nullopt,
                   std::optional<std::string_view> tag = std::nullopt) const;
  std::vector<SimEvent> EventLog() const;
  size_t LedgerSize() const;

  // Mirrors objects and key-value tables to a directory; existing contents are loaded first.
  void AttachStateDirectory(const std::filesystem::path& directory);

  // Direct samplers, exposed for model validation.
  SimTime SampleColdStart();
  SimTime SampleWarmStart();
  SimTime SampleStorageRead(StorageClass storage_class);

 private:
  friend class WorkerContext;

  struct ScheduledEvent {
    SimTime time;
    uint64_t sequence;
    std::function<void()> callback;
  };
  struct EventOrder {
    bool operator()(const ScheduledEvent& a, const ScheduledEvent& b) const {
      return a.time != b.time ? a.time > b.time : a.sequence > b.sequence;
    }
  };
  struct PendingMessage {
    QueueMessage message;
    uint64_t sequence;
  };
  struct InvocationState_ {
    InvocationRecord record;
    FunctionSpec function;
    std::string payload;
    WorkerEntrypoint entrypoint;
    std::string failure_queue;
  };

  bool StepLocked();
  void ScheduleLocked(SimTime at, std::function<void()> callback);
  void RunInvocation(InvocationId id);
  void LogLocked(SimTime time, SimEventKind kind, InvocationId invocation, InvocationId parent, std::string detail,
                 const std::string& tag);
  void ChargeLocked(SimTime time, CostCategory category, double quantity, double cost_cents, const std::string& tag);
  void ChargeComputeLocked(SimTime time, int memory_mib, SimTime duration, const std::string& tag);
  void SendMessageLocked(SimTime at, const std::string& queue, std::string body, const std::string& tag);
  // Storage request fault draw: returns slowdown (>= 1) or -1 for a crash.
  double DrawStorageFaultLocked();
  GetResult ReadLocked(const RequestContext& context, const std::string& bucket, const std::string& key,
                       uint64_t offset, uint64_t length, bool bill_transfer);
  void PersistObjectLocked(const StoredObject& object);
  void PersistKvLocked(const std::string& table);

  SimConfig config_;

  mutable std::mutex mutex_;
  std::mutex loop_mutex_;

  SimTime now_ = 0;
  uint64_t next_sequence_ = 0;
  // Min-heap on (time, sequence).
  std::vector<ScheduledEvent> events_;

  Rng latency_rng_;
  Rng fault_rng_;

  InvocationId next_invocation_ = 1;
  std::unordered_map<InvocationId, InvocationState_> invocations_;
  std::vector<InvocationId> invocation_order_;
  // Per function: times at which idle sandboxes became available.
  std::map<std::string, std::multiset<SimTime>> idle_sandboxes_;
  // End times of started invocations, for the admission quota.
  std::multiset<SimTime> busy_until_;
  size_t pending_starts_ = 0;

  std::map<std::string, StoredObject> objects_;  // "bucket/key" -> object
  std::map<std::string, std::vector<PendingMessage>> queues_;
  uint64_t next_message_ = 0;
  std::map<std::string, std::map<std::string, std::string>> kv_;

  CostLedger ledger_;
  std::vector<SimEvent> event_log_;

  std::optional<std::filesystem::path> state_directory_;
};

}  // namespace skylite
