#include "skylite/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "skylite/common/errors.hpp"

namespace skylite {

std::string_view StorageClassName(StorageClass storage_class) {
  return storage_class == StorageClass::kHot ? "hot" : "standard";
}

StorageClass ParseStorageClass(std::string_view name) {
  if (name == "standard") return StorageClass::kStandard;
  if (name == "hot") return StorageClass::kHot;
  Fail(ErrorCode::kInvalidArgument, "unknown storage class '" + std::string(name) + "'");
}

std::string_view InvocationStateName(InvocationState state) {
  switch (state) {
    case InvocationState::kPending:
      return "pending";
    case InvocationState::kRunning:
      return "running";
    case InvocationState::kFinished:
      return "finished";
    case InvocationState::kFailed:
      return "failed";
    case InvocationState::kStraggling:
      return "straggling";
  }
  return "unknown";
}

std::string_view SimEventKindName(SimEventKind kind) {
  switch (kind) {
    case SimEventKind::kInvokeSubmit:
      return "invoke_submit";
    case SimEventKind::kInvokeStart:
      return "invoke_start";
    case SimEventKind::kInvokeEnd:
      return "invoke_end";
    case SimEventKind::kInvokeCrash:
      return "invoke_crash";
    case SimEventKind::kPut:
      return "put";
    case SimEventKind::kGet:
      return "get";
    case SimEventKind::kList:
      return "list";
    case SimEventKind::kSend:
      return "send";
    case SimEventKind::kReceive:
      return "receive";
    case SimEventKind::kKvRead:
      return "kv_read";
    case SimEventKind::kKvWrite:
      return "kv_write";
  }
  return "unknown";
}

double FunctionSpec::Vcpus() const {
  constexpr double kMinVcpus = 0.07;
  constexpr double kMaxVcpus = 5.79;
  const double position = static_cast<double>(memory_mib - kMinFunctionMemoryMib) /
                          static_cast<double>(kMaxFunctionMemoryMib - kMinFunctionMemoryMib);
  return kMinVcpus + position * (kMaxVcpus - kMinVcpus);
}

void FunctionSpec::Validate() const {
  if (memory_mib < kMinFunctionMemoryMib || memory_mib > kMaxFunctionMemoryMib) {
    Fail(ErrorCode::kInvalidArgument, "function memory " + std::to_string(memory_mib) + " MiB outside [128, 10240]");
  }
}

SimTime WorkerContext::ToSimTime(SimTime local_time) const {
  const auto elapsed = static_cast<double>(local_time - record_.start_time);
  return record_.start_time + static_cast<SimTime>(std::llround(elapsed * slowdown_));
}

InvocationId WorkerContext::Invoke(const FunctionSpec& function, std::string payload, WorkerEntrypoint entrypoint,
                                   const std::string& failure_queue) {
  {
    std::lock_guard lock(sim_.mutex_);
    Advance(sim_.config_.latency.invoke_request.Sample(sim_.latency_rng_));
  }
  InvokeOptions options;
  options.at = ToSimTime(local_now_);
  options.parent = record_.id;
  options.tag = record_.tag;
  options.failure_queue = failure_queue;
  return sim_.Invoke(function, std::move(payload), std::move(entrypoint), std::move(options));
}

namespace {

constexpr uint64_t kFaultSeedSalt = 0x5eed0fa17ULL;
constexpr double kHoursPerMonth = 730.0;

std::string ObjectId(const std::string& bucket, const std::string& key) { return bucket + "/" + key; }

}  // namespace

Simulator::Simulator(SimConfig config)
    : config_(std::move(config)), latency_rng_(config_.seed), fault_rng_(config_.faults.rng_seed ^ kFaultSeedSalt) {
  config_.faults.Validate();
  if (config_.admission_quota < 1) {
    Fail(ErrorCode::kInvalidArgument, "admission quota must be positive");
  }
}

Simulator::~Simulator() = default;

void Simulator::SetFaults(const FaultPlan& faults) {
  std::lock_guard lock(mutex_);
  config_.faults = faults;
  fault_rng_ = Rng(faults.rng_seed ^ kFaultSeedSalt);
}

SimTime Simulator::Now() const {
  std::lock_guard lock(mutex_);
  return now_;
}

void Simulator::ScheduleLocked(SimTime at, std::function<void()> callback) {
  events_.push_back({std::max(at, now_), next_sequence_++, std::move(callback)});
  std::push_heap(events_.begin(), events_.end(), EventOrder{});
}

void Simulator::Schedule(SimTime at, std::function<void()> callback) {
  std::lock_guard lock(mutex_);
  ScheduleLocked(at, std::move(callback));
}

bool Simulator::StepLocked() {
  std::function<void()> callback;
  {
    std::lock_guard lock(mutex_);
    if (events_.empty()) return false;
    std::pop_heap(events_.begin(), events_.end(), EventOrder{});
    auto event = std::move(events_.back());
    events_.pop_back();
    now_ = std::max(now_, event.time);
    callback = std::move(event.callback);
  }
  callback();
  return true;
}

bool Simulator::Step() {
  std::lock_guard loop(loop_mutex_);
  return StepLocked();
}

void Simulator::RunUntil(const std::function<bool()>& done) {
  for (;;) {
    std::lock_guard loop(loop_mutex_);
    if (done()) return;
    if (!StepLocked()) {
      Fail(ErrorCode::kInternal, "simulation stalled: no pending events");
    }
  }
}

void Simulator::RunUntilIdle() {
  std::lock_guard loop(loop_mutex_);
  while (StepLocked()) {
  }
}

void Simulator::AdvanceIdle(SimTime duration) {
  std::lock_guard loop(loop_mutex_);
  SimTime target = 0;
  {
    std::lock_guard lock(mutex_);
    target = now_ + duration;
  }
  for (;;) {
    {
      std::lock_guard lock(mutex_);
      if (events_.empty() || events_.front().time > target) {
        now_ = std::max(now_, target);
        return;
      }
    }
    StepLocked();
  }
}

void Simulator::LogLocked(SimTime time, SimEventKind kind, InvocationId invocation, InvocationId parent,
                          std::string detail, const std::string& tag) {
  event_log_.push_back({time, kind, invocation, parent, std::move(detail), tag});
}

void Simulator::ChargeLocked(SimTime time, CostCategory category, double quantity, double cost_cents,
                             const std::string& tag) {
  ledger_.Append({time, category, quantity, cost_cents, tag});
}

void Simulator::ChargeComputeLocked(SimTime time, int memory_mib, SimTime duration, const std::string& tag) {
  const double gib_seconds = (memory_mib / 1024.0) * ToSeconds(std::max<SimTime>(0, duration));
  const double cents = gib_seconds * config_.prices.MemoryPricePerGibHour(memory_mib) / 3600.0;
  ChargeLocked(time, CostCategory::kComputeGibSeconds, gib_seconds, cents, tag);
}

InvocationId Simulator::Invoke(const FunctionSpec& function, std::string payload, WorkerEntrypoint entrypoint,
                               InvokeOptions options) {
  function.Validate();
  std::lock_guard lock(mutex_);
  if (payload.size() > config_.payload_limit_bytes) {
    Fail(ErrorCode::kPayloadTooLarge, "invocation payload of " + std::to_string(payload.size()) + " bytes exceeds " +
                                          std::to_string(config_.payload_limit_bytes));
  }
  const SimTime submit = std::max(options.at.value_or(now_), now_);

  busy_until_.erase(busy_until_.begin(), busy_until_.upper_bound(submit));
  if (pending_starts_ + busy_until_.size() >= static_cast<size_t>(config_.admission_quota)) {
    Fail(ErrorCode::kQuotaExceeded,
         "admission quota of " + std::to_string(config_.admission_quota) + " concurrent invocations reached");
  }

  // Reuse the most recently released sandbox that is idle at submit time and not yet reclaimed.
  StartKind kind = StartKind::kCold;
  auto& idle = idle_sandboxes_[function.name];
  idle.erase(idle.begin(), idle.lower_bound(submit - config_.keep_alive));
  auto candidate = idle.upper_bound(submit);
  if (candidate != idle.begin()) {
    --candidate;
    idle.erase(candidate);
    kind = StartKind::kWarm;
  }
  const SimTime delay = kind == StartKind::kCold ? config_.latency.cold_start.Sample(latency_rng_)
                                                 : config_.latency.warm_start.Sample(latency_rng_);

  const InvocationId id = next_invocation_++;
  InvocationState_ state;
  state.record.id = id;
  state.record.parent = options.parent;
  state.record.function = function.name;
  state.record.start_kind = kind;
  state.record.submit_time = submit;
  state.record.start_time = submit + delay;
  state.record.payload_bytes = payload.size();
  state.record.tag = options.tag;
  state.function = function;
  state.payload = std::move(payload);
  state.entrypoint = std::move(entrypoint);
  state.failure_queue = std::move(options.failure_queue);
  const SimTime start = state.record.start_time;
  invocations_.emplace(id, std::move(state));
  invocation_order_.push_back(id);
  ++pending_starts_;
  LogLocked(submit, SimEventKind::kInvokeSubmit, id, options.parent,
            kind == StartKind::kCold ? "cold" : "warm", options.tag);
  ScheduleLocked(start, [this, id]() { RunInvocation(id); });
  return id;
}

void Simulator::RunInvocation(InvocationId id) {
  bool crash = false;
  double slowdown = 1.0;
  InvocationRecord record;
  FunctionSpec function;
  std::string payload;
  WorkerEntrypoint entrypoint;
  {
    std::lock_guard lock(mutex_);
    auto& state = invocations_.at(id);
    --pending_starts_;
    if (config_.faults.affect_invocations) {
      crash = fault_rng_.Bernoulli(config_.faults.crash_fraction);
      if (!crash && fault_rng_.Bernoulli(config_.faults.straggler_fraction)) {
        slowdown = config_.faults.straggler_slowdown;
      }
    }
    state.record.state = slowdown > 1.0 ? InvocationState::kStraggling : InvocationState::kRunning;
    state.record.straggler = slowdown > 1.0;
    record = state.record;
    function = state.function;
    LogLocked(record.start_time, SimEventKind::kInvokeStart, id, record.parent, "", record.tag);
    if (!crash) {
      payload = state.payload;
      entrypoint = state.entrypoint;
    }
  }

  SimTime end = record.start_time;
  bool failed = crash;
  if (crash) {
    std::lock_guard lock(mutex_);
    end += config_.latency.warm_start.Sample(latency_rng_);
  } else {
    WorkerContext context(*this, record, function, std::move(payload), slowdown);
    try {
      entrypoint(context);
    } catch (const std::exception&) {
      // An escaping exception kills the sandbox like an infrastructure crash.
      failed = true;
    }
    end = context.ToSimTime(context.Now());
  }

  std::lock_guard lock(mutex_);
  auto& state = invocations_.at(id);
  state.record.end_time = end;
  state.record.state = failed ? InvocationState::kFailed : InvocationState::kFinished;
  state.record.crashed = failed;
  busy_until_.insert(end);
  ChargeComputeLocked(end, state.function.memory_mib, end - state.record.start_time, state.record.tag);
  if (failed) {
    LogLocked(end, SimEventKind::kInvokeCrash, id, state.record.parent, "", state.record.tag);
    if (!state.failure_queue.empty()) {
      nlohmann::json notice;
      notice["invocation_failed"] = id;
      notice["payload"] = state.payload;
      SendMessageLocked(end, state.failure_queue, notice.dump(), state.record.tag);
    }
  } else {
    idle_sandboxes_[state.function.name].insert(end);
    LogLocked(end, SimEventKind::kInvokeEnd, id, state.record.parent, "", state.record.tag);
  }
  // The timeline passes through the end of every invocation.
  ScheduleLocked(end, [] {});
  // The body has run; the entrypoint is no longer needed. The payload stays for the request log.
  state.entrypoint = nullptr;
}

InvocationRecord Simulator::Invocation(InvocationId id) const {
  std::lock_guard lock(mutex_);
  const auto it = invocations_.find(id);
  if (it == invocations_.end()) {
    Fail(ErrorCode::kInvalidArgument, "unknown invocation " + std::to_string(id));
  }
  return it->second.record;
}

std::string Simulator::InvocationPayload(InvocationId id) const {
  std::lock_guard lock(mutex_);
  const auto it = invocations_.find(id);
  if (it == invocations_.end()) {
    Fail(ErrorCode::kInvalidArgument, "unknown invocation " + std::to_string(id));
  }
  return it->second.payload;
}

std::vector<InvocationRecord> Simulator::Invocations(std::optional<std::string_view> tag) const {
  std::lock_guard lock(mutex_);
  std::vector<InvocationRecord> records;
  for (const auto id : invocation_order_) {
    const auto& record = invocations_.at(id).record;
    if (!tag || record.tag == *tag) records.push_back(record);
  }
  return records;
}

size_t Simulator::PendingInvocations(std::string_view tag) const {
  std::lock_guard lock(mutex_);
  size_t count = 0;
  for (const auto& [id, state] : invocations_) {
    if (state.record.tag == tag && state.record.state == InvocationState::kPending) ++count;
  }
  return count;
}

void Simulator::BillCompute(const RequestContext& context, int memory_mib, SimTime duration) {
  std::lock_guard lock(mutex_);
  ChargeComputeLocked(context.at, memory_mib, duration, context.tag);
}

double Simulator::DrawStorageFaultLocked() {
  if (!config_.faults.affect_storage_requests) return 1.0;
  if (fault_rng_.Bernoulli(config_.faults.crash_fraction)) return -1.0;
  if (fault_rng_.Bernoulli(config_.faults.straggler_fraction)) return config_.faults.straggler_slowdown;
  return 1.0;
}

SimTime Simulator::TransferTime(uint64_t bytes) const {
  const double seconds = static_cast<double>(bytes) * 8.0 / (config_.function_net_gbps * 1e9);
  return static_cast<SimTime>(std::llround(seconds * kMicrosPerSecond));
}

PutReceipt Simulator::PutObject(const RequestContext& context, const std::string& bucket, const std::string& key,
                                std::string bytes, StorageClass storage_class) {
  std::lock_guard lock(mutex_);
  const SimTime at = std::max(context.at, now_);
  const auto& prices = config_.prices.Storage(storage_class);
  const double fault = DrawStorageFaultLocked();
  SimTime latency = config_.latency.StorageWrite(storage_class).Sample(latency_rng_);
  ChargeLocked(at, CostCategory::kRequestsWrite, 1, prices.write_per_million / 1e6, context.tag);
  if (fault < 0) {
    LogLocked(at, SimEventKind::kPut, kNoInvocation, kNoInvocation, ObjectId(bucket, key) + " failed", context.tag);
    return {true, latency};
  }
  latency = static_cast<SimTime>(static_cast<double>(latency) * fault) + TransferTime(bytes.size());
  const double gib = static_cast<double>(bytes.size()) / kBytesPerGib;
  ChargeLocked(at, CostCategory::kTransferGib, gib, gib * prices.transfer_write_per_gib, context.tag);
  const double gib_months = gib * config_.storage_retention_hours / kHoursPerMonth;
  ChargeLocked(at, CostCategory::kStorageGibMonths, gib_months, gib_months * prices.storage_gib_month, context.tag);

  StoredObject object{bucket, key, std::make_shared<const std::string>(std::move(bytes)), storage_class, at};
  LogLocked(at, SimEventKind::kPut, kNoInvocation, kNoInvocation, ObjectId(bucket, key), context.tag);
  if (state_directory_) PersistObjectLocked(object);
  objects_[ObjectId(bucket, key)] = std::move(object);
  return {false, latency};
}

GetResult Simulator::ReadLocked(const RequestContext& context, const std::string& bucket, const std::string& key,
                                uint64_t offset, uint64_t length, bool bill_transfer) {
  const SimTime at = std::max(context.at, now_);
  const auto it = objects_.find(ObjectId(bucket, key));
  if (it == objects_.end()) {
    Fail(ErrorCode::kNoSuchKey, "no object " + ObjectId(bucket, key));
  }
  const auto& object = it->second;
  const uint64_t size = object.bytes->size();
  if (length == kToEnd) {
    if (offset > size) Fail(ErrorCode::kRangeUnsatisfiable, "offset beyond end of " + key);
    length = size - offset;
  }
  if (offset > size || length > size - offset) {
    Fail(ErrorCode::kRangeUnsatisfiable, "range [" + std::to_string(offset) + ", +" + std::to_string(length) +
                                             ") outside object " + key + " of " + std::to_string(size) + " bytes");
  }
  const auto& prices = config_.prices.Storage(object.storage_class);
  GetResult result;
  result.object_size = size;
  result.storage_class = object.storage_class;
  const double fault = DrawStorageFaultLocked();
  result.first_byte_latency = config_.latency.StorageRead(object.storage_class).Sample(latency_rng_);
  ChargeLocked(at, CostCategory::kRequestsRead, 1, prices.read_per_million / 1e6, context.tag);
  LogLocked(at, SimEventKind::kGet, kNoInvocation, kNoInvocation,
            ObjectId(bucket, key) + " " + std::to_string(offset) + "+" + std::to_string(length) +
                (fault < 0 ? " failed" : ""),
            context.tag);
  if (fault < 0) {
    result.failed = true;
    return result;
  }
  result.first_byte_latency = static_cast<SimTime>(static_cast<double>(result.first_byte_latency) * fault);
  result.data = object.bytes->substr(offset, length);
  result.transfer_time = TransferTime(length);
  if (bill_transfer) {
    const double gib = static_cast<double>(length) / kBytesPerGib;
    ChargeLocked(at, CostCategory::kTransferGib, gib, gib * prices.transfer_read_per_gib, context.tag);
  }
  return result;
}

GetResult Simulator::GetObjectRange(const RequestContext& context, const std::string& bucket, const std::string& key,
                                    uint64_t offset, uint64_t length, bool bill_transfer) {
  std::lock_guard lock(mutex_);
  return ReadLocked(context, bucket, key, offset, length, bill_transfer);
}

GetResult Simulator::GetObjectSuffix(const RequestContext& context, const std::string& bucket, const std::string& key,
                                     uint64_t length, bool bill_transfer) {
  std::lock_guard lock(mutex_);
  const auto it = objects_.find(ObjectId(bucket, key));
  if (it == objects_.end()) {
    Fail(ErrorCode::kNoSuchKey, "no object " + ObjectId(bucket, key));
  }
  const uint64_t size = it->second.bytes->size();
  const uint64_t take = std::min(length, size);
  return ReadLocked(context, bucket, key, size - take, take, bill_transfer);
}

void Simulator::BillTransfer(const RequestContext& context, StorageClass storage_class, uint64_t bytes, bool write) {
  std::lock_guard lock(mutex_);
  const auto& prices = config_.prices.Storage(storage_class);
  const double gib = static_cast<double>(bytes) / kBytesPerGib;
  const double price = write ? prices.transfer_write_per_gib : prices.transfer_read_per_gib;
  ChargeLocked(std::max(context.at, now_), CostCategory::kTransferGib, gib, gib * price, context.tag);
}

std::vector<std::string> Simulator::ListObjects(const RequestContext& context, const std::string& bucket,
                                                const std::string& prefix) {
  std::lock_guard lock(mutex_);
  const SimTime at = std::max(context.at, now_);
  std::vector<std::string> keys;
  const std::string start = ObjectId(bucket, prefix);
  for (auto it = objects_.lower_bound(start); it != objects_.end() && it->first.starts_with(start); ++it) {
    keys.push_back(it->second.key);
  }
  const size_t requests = std::max<size_t>(1, (keys.size() + 999) / 1000);
  ChargeLocked(at, CostCategory::kRequestsRead, static_cast<double>(requests),
               static_cast<double>(requests) * config_.prices.standard.read_per_million / 1e6, context.tag);
  LogLocked(at, SimEventKind::kList, kNoInvocation, kNoInvocation, ObjectId(bucket, prefix), context.tag);
  return keys;
}

void Simulator::DeleteObject(const std::string& bucket, const std::string& key) {
  std::lock_guard lock(mutex_);
  objects_.erase(ObjectId(bucket, key));
  if (state_directory_) {
    std::filesystem::remove(*state_directory_ / "objects" / "standard" / bucket / key);
    std::filesystem::remove(*state_directory_ / "objects" / "hot" / bucket / key);
  }
}

std::optional<StoredObject> Simulator::PeekObject(const std::string& bucket, const std::string& key) const {
  std::lock_guard lock(mutex_);
  const auto it = objects_.find(ObjectId(bucket, key));
  if (it == objects_.end()) return std::nullopt;
  return it->second;
}

void Simulator::CopyObjectsFrom(const Simulator& other) {
  std::map<std::string, StoredObject> copy;
  {
    std::lock_guard lock(other.mutex_);
    copy = other.objects_;
  }
  std::lock_guard lock(mutex_);
  for (auto& [id, object] : copy) {
    object.created_at = now_;
    objects_[id] = std::move(object);
  }
}

void Simulator::SendMessageLocked(SimTime at, const std::string& queue, std::string body, const std::string& tag) {
  const SimTime visible = at + config_.latency.queue_send.Sample(latency_rng_);
  ChargeLocked(at, CostCategory::kQueueMessages, 1, config_.prices.queue_per_million / 1e6, tag);
  LogLocked(at, SimEventKind::kSend, kNoInvocation, kNoInvocation, queue, tag);
  queues_[queue].push_back({{queue, std::move(body), visible}, next_message_++});
}

void Simulator::SendMessage(const RequestContext& context, const std::string& queue, std::string body) {
  std::lock_guard lock(mutex_);
  if (body.size() > config_.payload_limit_bytes) {
    Fail(ErrorCode::kPayloadTooLarge, "message of " + std::to_string(body.size()) + " bytes exceeds limit");
  }
  SendMessageLocked(std::max(context.at, now_), queue, std::move(body), context.tag);
}

std::vector<QueueMessage> Simulator::ReceiveMessages(const RequestContext& context, const std::string& queue,
                                                     size_t max_n) {
  std::lock_guard lock(mutex_);
  const SimTime at = std::max(context.at, now_);
  ChargeLocked(at, CostCategory::kQueueMessages, 1, config_.prices.queue_per_million / 1e6, context.tag);
  LogLocked(at, SimEventKind::kReceive, kNoInvocation, kNoInvocation, queue, context.tag);
  std::vector<QueueMessage> received;
  const auto it = queues_.find(queue);
  if (it == queues_.end()) return received;
  auto& pending = it->second;
  std::vector<size_t> visible;
  for (size_t i = 0; i < pending.size(); ++i) {
    if (pending[i].message.enqueue_time <= at) visible.push_back(i);
  }
  // Unordered delivery.
  for (size_t i = visible.size(); i > 1; --i) {
    std::swap(visible[i - 1], visible[latency_rng_.NextU64() % i]);
  }
  visible.resize(std::min(visible.size(), max_n));
  std::vector<bool> remove(pending.size(), false);
  for (const auto index : visible) {
    received.push_back(pending[index].message);
    remove[index] = !fault_rng_.Bernoulli(config_.faults.queue_duplicate_fraction);
  }
  std::vector<PendingMessage> kept;
  for (size_t i = 0; i < pending.size(); ++i) {
    if (!remove[i]) kept.push_back(std::move(pending[i]));
  }
  pending = std::move(kept);
  return received;
}

void Simulator::DeleteQueue(const std::string& queue) {
  std::lock_guard lock(mutex_);
  queues_.erase(queue);
}

SimTime Simulator::KvPut(const RequestContext& context, const std::string& table, const std::string& key,
                         std::string value) {
  std::lock_guard lock(mutex_);
  const SimTime at = std::max(context.at, now_);
  ChargeLocked(at, CostCategory::kRequestsWrite, 1, config_.prices.kv.write_per_million / 1e6, context.tag);
  LogLocked(at, SimEventKind::kKvWrite, kNoInvocation, kNoInvocation, table + "/" + key, context.tag);
  kv_[table][key] = std::move(value);
  if (state_directory_) PersistKvLocked(table);
  return config_.latency.kv_write.Sample(latency_rng_);
}

KvGetResult Simulator::KvGet(const RequestContext& context, const std::string& table, const std::string& key) {
  std::lock_guard lock(mutex_);
  const SimTime at = std::max(context.at, now_);
  ChargeLocked(at, CostCategory::kRequestsRead, 1, config_.prices.kv.read_per_million / 1e6, context.tag);
  LogLocked(at, SimEventKind::kKvRead, kNoInvocation, kNoInvocation, table + "/" + key, context.tag);
  KvGetResult result;
  result.latency = config_.latency.kv_read.Sample(latency_rng_);
  const auto table_it = kv_.find(table);
  if (table_it != kv_.end()) {
    const auto it = table_it->second.find(key);
    if (it != table_it->second.end()) result.value = it->second;
  }
  return result;
}

std::vector<std::pair<std::string, std::string>> Simulator::KvScan(const RequestContext& context,
                                                                   const std::string& table) {
  std::lock_guard lock(mutex_);
  const SimTime at = std::max(context.at, now_);
  ChargeLocked(at, CostCategory::kRequestsRead, 1, config_.prices.kv.read_per_million / 1e6, context.tag);
  LogLocked(at, SimEventKind::kKvRead, kNoInvocation, kNoInvocation, table + "/*", context.tag);
  std::vector<std::pair<std::string, std::string>> entries;
  const auto it = kv_.find(table);
  if (it != kv_.end()) entries.assign(it->second.begin(), it->second.end());
  return entries;
}

void Simulator::KvClear(const std::string& table) {
  std::lock_guard lock(mutex_);
  kv_.erase(table);
  if (state_directory_) std::filesystem::remove(*state_directory_ / "kv" / (table + ".json"));
}

CostLedger Simulator::Ledger() const {
  std::lock_guard lock(mutex_);
  return ledger_;
}

double Simulator::TotalCost(std::optional<CostCategory> category, std::optional<std::string_view> tag) const {
  std::lock_guard lock(mutex_);
  return ledger_.TotalCost(category, tag);
}

std::vector<SimEvent> Simulator::EventLog() const {
  std::lock_guard lock(mutex_);
  return event_log_;
}

size_t Simulator::LedgerSize() const {
  std::lock_guard lock(mutex_);
  return ledger_.Size();
}

SimTime Simulator::SampleColdStart() {
  std::lock_guard lock(mutex_);
  return config_.latency.cold_start.Sample(latency_rng_);
}

SimTime Simulator::SampleWarmStart() {
  std::lock_guard lock(mutex_);
  return config_.latency.warm_start.Sample(latency_rng_);
}

SimTime Simulator::SampleStorageRead(StorageClass storage_class) {
  std::lock_guard lock(mutex_);
  return config_.latency.StorageRead(storage_class).Sample(latency_rng_);
}

void Simulator::PersistObjectLocked(const StoredObject& object) {
  const auto path = *state_directory_ / "objects" / std::string(StorageClassName(object.storage_class)) /
                    object.bucket / object.key;
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(object.bytes->data(), static_cast<std::streamsize>(object.bytes->size()));
  if (!out) Fail(ErrorCode::kInternal, "cannot write " + path.string());
  // A put replaces the object regardless of class.
  const auto other = object.storage_class == StorageClass::kHot ? "standard" : "hot";
  std::filesystem::remove(*state_directory_ / "objects" / other / object.bucket / object.key);
}

void Simulator::PersistKvLocked(const std::string& table) {
  const auto path = *state_directory_ / "kv" / (table + ".json");
  std::filesystem::create_directories(path.parent_path());
  nlohmann::json json = kv_[table];
  std::ofstream out(path, std::ios::trunc);
  out << json.dump(1);
}

void Simulator::AttachStateDirectory(const std::filesystem::path& directory) {
  std::lock_guard lock(mutex_);
  state_directory_ = directory;
  std::filesystem::create_directories(directory);
  for (const auto storage_class : {StorageClass::kStandard, StorageClass::kHot}) {
    const auto root = directory / "objects" / std::string(StorageClassName(storage_class));
    if (!std::filesystem::exists(root)) continue;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
      if (!entry.is_regular_file()) continue;
      const auto relative = std::filesystem::relative(entry.path(), root).generic_string();
      const auto slash = relative.find('/');
      if (slash == std::string::npos) continue;
      std::ifstream in(entry.path(), std::ios::binary);
      std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      StoredObject object{relative.substr(0, slash), relative.substr(slash + 1),
                          std::make_shared<const std::string>(std::move(bytes)), storage_class, now_};
      objects_[relative] = std::move(object);
    }
  }
  const auto kv_root = directory / "kv";
  if (std::filesystem::exists(kv_root)) {
    for (const auto& entry : std::filesystem::directory_iterator(kv_root)) {
      if (entry.path().extension() != ".json") continue;
      std::ifstream in(entry.path());
      const auto json = nlohmann::json::parse(in);
      kv_[entry.path().stem().string()] = json.get<std::map<std::string, std::string>>();
    }
  }
}

}  // namespace skylite
