#include "skylite/storage/input_handler.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <variant>

#include "skylite/common/errors.hpp"

namespace skylite {

SimTime IoContext::ToSimTime(SimTime local) const {
  return origin + static_cast<SimTime>(std::llround(static_cast<double>(local - origin) * slowdown));
}

IoContext IoContext::ForWorker(WorkerContext& context) {
  return {&context.Sim(), context.Tag(), context.StartTime(), context.Slowdown()};
}

void FetchStats::Merge(const FetchStats& other) {
  requests += other.requests;
  retriggers += other.retriggers;
  failures += other.failures;
  bytes += other.bytes;
  finish = std::max(finish, other.finish);
}

RangeFetcher::RangeFetcher(IoContext io, InputOptions options, SimTime start_local)
    : io_(std::move(io)), options_(options), link_free_(start_local) {
  Assert(io_.sim != nullptr, "fetcher without simulator");
  if (options_.parallelism < 1) Fail(ErrorCode::kInvalidArgument, "parallelism must be at least 1");
  if (options_.max_attempts < 1) Fail(ErrorCode::kInvalidArgument, "max_attempts must be at least 1");
  for (size_t i = 0; i < options_.parallelism; ++i) slots_.push(start_local);
  seed_median_ = Millis(io_.sim->Config().latency.standard_read.median_ms);
  stats_.finish = start_local;
}

SimTime RangeFetcher::RetriggerTimeout() const {
  const SimTime median = observed_.empty() ? seed_median_ : observed_[observed_.size() / 2];
  return std::max(options_.min_retrigger_timeout,
                  static_cast<SimTime>(options_.retrigger_factor * static_cast<double>(median)));
}

void RangeFetcher::Observe(SimTime first_byte_latency) {
  observed_.insert(std::upper_bound(observed_.begin(), observed_.end(), first_byte_latency), first_byte_latency);
}

FetchedRange RangeFetcher::Fetch(const std::string& bucket, const std::string& key, uint64_t offset,
                                 uint64_t length, SimTime earliest_local) {
  return Issue(bucket, key, offset, length, false, earliest_local);
}

FetchedRange RangeFetcher::FetchSuffix(const std::string& bucket, const std::string& key, uint64_t length,
                                       SimTime earliest_local) {
  return Issue(bucket, key, 0, length, true, earliest_local);
}

FetchedRange RangeFetcher::Issue(const std::string& bucket, const std::string& key, uint64_t offset, uint64_t length,
                                 bool suffix, SimTime earliest_local) {
  const SimTime slot_free = slots_.top();
  slots_.pop();
  SimTime attempt_at = std::max(slot_free, earliest_local);

  constexpr SimTime kNever = std::numeric_limits<SimTime>::max();
  std::optional<GetResult> winner;
  SimTime winner_ready = kNever;
  for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
    const SimTime timeout = RetriggerTimeout();
    GetResult result;
    try {
      result = suffix ? io_.sim->GetObjectSuffix(io_.At(attempt_at), bucket, key, length, false)
                      : io_.sim->GetObjectRange(io_.At(attempt_at), bucket, key, offset, length, false);
    } catch (const SkyliteError& error) {
      slots_.push(attempt_at);
      Fail(ErrorCode::kFetchFailed, "fetch of " + bucket + "/" + key + " failed: " + error.what());
    }
    ++stats_.requests;
    const SimTime ready = attempt_at + result.first_byte_latency;
    SimTime next_attempt = 0;
    bool timed_out = false;
    if (result.failed) {
      ++stats_.failures;
      next_attempt = ready;
    } else {
      Observe(result.first_byte_latency);
      if (ready < winner_ready) {
        winner_ready = ready;
        winner = std::move(result);
      }
      next_attempt = attempt_at + timeout;
      timed_out = true;
    }
    if (winner && (!options_.retrigger || next_attempt >= winner_ready)) break;
    if (attempt + 1 < options_.max_attempts && timed_out) ++stats_.retriggers;
    attempt_at = next_attempt;
  }
  if (!winner) {
    slots_.push(attempt_at);
    Fail(ErrorCode::kFetchFailed, "all " + std::to_string(options_.max_attempts) + " attempts to read " + bucket +
                                      "/" + key + " failed");
  }

  // The payload streams over the worker's single link once the first byte arrives.
  const uint64_t bytes = winner->data.size();
  const SimTime transfer_start = std::max(winner_ready, link_free_);
  const SimTime done = transfer_start + io_.sim->TransferTime(bytes);
  link_free_ = done;
  slots_.push(done);
  io_.sim->BillTransfer(io_.At(winner_ready), winner->storage_class, bytes, false);
  stats_.bytes += bytes;
  stats_.finish = std::max(stats_.finish, done);
  return {std::move(winner->data), winner->object_size, done};
}

std::vector<std::string> RangeFetcher::FetchPlan(const RangeRequestPlan& plan, SimTime earliest_local) {
  std::vector<std::string> buffers;
  buffers.reserve(plan.chunks.size());
  for (const auto& chunk : plan.chunks) buffers.emplace_back(chunk.length, '\0');
  for (const auto& range : plan.ranges) {
    auto fetched = Fetch(range.bucket, range.key, range.offset, range.length, earliest_local);
    buffers.at(range.target_buffer_index).replace(range.buffer_offset, fetched.data.size(), fetched.data);
  }
  return buffers;
}

FooterRead ReadFooter(RangeFetcher& fetcher, const std::string& bucket, const std::string& key,
                      SimTime earliest_local, uint64_t tail_probe_bytes) {
  FooterRead read;
  auto probe = fetcher.FetchSuffix(bucket, key, std::max<uint64_t>(tail_probe_bytes, kColumnarTrailerBytes),
                                   earliest_local);
  read.requests = 1;
  read.object_size = probe.object_size;
  read.tail = std::move(probe.data);
  read.tail_offset = read.object_size - read.tail.size();
  read.ready = probe.ready;
  const uint32_t footer_length = ReadTrailer(read.tail, read.object_size);
  const uint64_t footer_offset = read.object_size - kColumnarTrailerBytes - footer_length;
  if (footer_offset >= read.tail_offset) {
    read.footer = ParseFooter(std::string_view(read.tail).substr(footer_offset - read.tail_offset, footer_length));
  } else {
    auto rest = fetcher.Fetch(bucket, key, footer_offset, footer_length, probe.ready);
    read.requests = 2;
    read.ready = rest.ready;
    read.footer = ParseFooter(rest.data);
  }
  return read;
}

namespace {

// The buffers of one row group, ready for decoding.
struct RowGroupBuffers {
  std::shared_ptr<const FileFooter> footer;
  size_t row_group = 0;
  std::vector<size_t> columns;
  std::vector<std::string> chunks;
  SimTime ready = 0;
};

struct EndOfScan {};

using HandoffItem = std::variant<RowGroupBuffers, EndOfScan, std::exception_ptr>;

class BoundedHandoff {
 public:
  explicit BoundedHandoff(size_t capacity) : capacity_(std::max<size_t>(1, capacity)) {}

  // False when the consumer has gone away.
  bool Push(HandoffItem item) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_ || closed_; });
    if (closed_) return false;
    items_.push_back(std::move(item));
    not_empty_.notify_one();
    return true;
  }

  HandoffItem Pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return !items_.empty(); });
    auto item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void Close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_full_.notify_all();
  }

 private:
  const size_t capacity_;
  std::mutex mutex_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
  std::deque<HandoffItem> items_;
  bool closed_ = false;
};

}  // namespace

InputHandler::InputHandler(RangeFetcher& fetcher, InputOptions options) : fetcher_(fetcher), options_(options) {}

void InputHandler::Scan(const ScanRequest& request, SimTime earliest_local,
                        const std::function<void(ScanBatch&&)>& consume) {
  BoundedHandoff handoff(options_.prefetch_row_groups);
  const FetchStats before = fetcher_.Stats();
  uint64_t pruned = 0;

  std::thread io_thread([&]() {
    try {
      // Footer probes for every object go out first and overlap with each other.
      std::vector<FooterRead> footers;
      footers.reserve(request.objects.size());
      for (const auto& object : request.objects) {
        footers.push_back(ReadFooter(fetcher_, object.bucket, object.key, earliest_local, options_.tail_probe_bytes));
      }
      for (size_t i = 0; i < request.objects.size(); ++i) {
        const auto& object = request.objects[i];
        auto& read = footers[i];
        const auto footer = std::make_shared<const FileFooter>(std::move(read.footer));
        const auto plan = PlanRanges(object.bucket, object.key, *footer, request.columns, request.predicates,
                                     options_.max_request_bytes, object.row_groups);
        const size_t candidates = object.row_groups.empty() ? footer->row_groups.size() : object.row_groups.size();
        pruned += candidates - plan.row_groups.size();

        size_t next_range = 0;
        size_t next_chunk = 0;
        for (const auto group : plan.row_groups) {
          RowGroupBuffers buffers;
          buffers.footer = footer;
          buffers.row_group = group;
          buffers.columns = plan.columns;
          buffers.ready = read.ready;
          for (size_t c = 0; c < plan.columns.size(); ++c, ++next_chunk) {
            const auto& chunk = plan.chunks[next_chunk];
            std::string data;
            if (chunk.offset >= read.tail_offset) {
              // Already delivered by the tail probe.
              data = read.tail.substr(chunk.offset - read.tail_offset, chunk.length);
              while (next_range < plan.ranges.size() && plan.ranges[next_range].target_buffer_index == next_chunk) {
                ++next_range;
              }
            } else {
              data.assign(chunk.length, '\0');
              while (next_range < plan.ranges.size() && plan.ranges[next_range].target_buffer_index == next_chunk) {
                const auto& range = plan.ranges[next_range++];
                auto fetched = fetcher_.Fetch(range.bucket, range.key, range.offset, range.length, read.ready);
                data.replace(range.buffer_offset, fetched.data.size(), fetched.data);
                buffers.ready = std::max(buffers.ready, fetched.ready);
              }
            }
            buffers.chunks.push_back(std::move(data));
          }
          if (!handoff.Push(std::move(buffers))) return;
        }
      }
      handoff.Push(EndOfScan{});
    } catch (...) {
      handoff.Push(std::current_exception());
    }
  });

  std::exception_ptr failure;
  try {
    for (;;) {
      auto item = handoff.Pop();
      if (std::holds_alternative<EndOfScan>(item)) break;
      if (auto* error = std::get_if<std::exception_ptr>(&item)) std::rethrow_exception(*error);
      auto& buffers = std::get<RowGroupBuffers>(item);
      const auto& footer = *buffers.footer;
      const auto& group = footer.row_groups[buffers.row_group];
      std::vector<Column> columns;
      uint64_t decoded = 0;
      for (size_t c = 0; c < buffers.columns.size(); ++c) {
        const size_t index = buffers.columns[c];
        const auto& meta = group.columns[index];
        columns.push_back(DecodeChunk(buffers.chunks[c], meta, footer.schema.At(index), group.row_count));
        decoded += meta.uncompressed_length;
      }
      RecordBatch whole(footer.schema.Select(buffers.columns), std::move(columns));
      if (buffers.columns.empty()) {
        for (uint64_t row = 0; row < group.row_count; ++row) whole.AppendRow(std::vector<Value>{});
      }
      buffers.chunks.clear();
      ++stats_.row_groups_read;
      stats_.rows += group.row_count;
      for (size_t offset = 0; offset < group.row_count; offset += options_.batch_size) {
        const size_t length = std::min<size_t>(options_.batch_size, group.row_count - offset);
        ScanBatch batch;
        batch.batch = length == group.row_count ? std::move(whole) : whole.Slice(offset, length);
        batch.ready = buffers.ready;
        batch.decoded_bytes = offset == 0 ? decoded : 0;
        consume(std::move(batch));
      }
    }
  } catch (...) {
    failure = std::current_exception();
  }
  handoff.Close();
  io_thread.join();

  FetchStats delta = fetcher_.Stats();
  delta.requests -= before.requests;
  delta.retriggers -= before.retriggers;
  delta.failures -= before.failures;
  delta.bytes -= before.bytes;
  stats_.fetch.Merge(delta);
  stats_.objects += request.objects.size();
  stats_.row_groups_pruned += pruned;
  if (failure) std::rethrow_exception(failure);
}

}  // namespace skylite
