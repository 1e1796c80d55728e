#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <queue>
#include <string>
#include <vector>

#include "skylite/sim/simulator.hpp"
#include "skylite/storage/columnar_file.hpp"
#include "skylite/storage/range_planner.hpp"
#include "skylite/storage/record_batch.hpp"

namespace skylite {

struct InputOptions {
  uint64_t tail_probe_bytes = 64 * kKiB;
  uint64_t max_request_bytes = kDefaultMaxRequestBytes;
  // Concurrent requests per worker.
  size_t parallelism = 8;
  // A request without a first byte after max(min_timeout, factor x running median) is issued again.
  bool retrigger = true;
  SimTime min_retrigger_timeout = Millis(50);
  double retrigger_factor = 3.0;
  int max_attempts = 4;
  size_t batch_size = kDefaultBatchSize;
  // Row groups buffered between the I/O thread and the decoder.
  size_t prefetch_row_groups = 2;
};

// Places a worker's local clock on the simulated timeline (see WorkerContext::ToSimTime).
struct IoContext {
  Simulator* sim = nullptr;
  std::string tag;
  SimTime origin = 0;
  double slowdown = 1.0;

  SimTime ToSimTime(SimTime local) const;
  RequestContext At(SimTime local) const { return {ToSimTime(local), tag}; }
  static IoContext ForWorker(WorkerContext& context);
};

struct FetchStats {
  // Billed GET requests, including duplicates and failed attempts.
  uint64_t requests = 0;
  // Duplicates issued because a request exceeded its timeout.
  uint64_t retriggers = 0;
  // Attempts that returned an injected failure.
  uint64_t failures = 0;
  // Bytes delivered (and billed as transfer).
  uint64_t bytes = 0;
  // Local time at which the last byte arrived.
  SimTime finish = 0;

  void Merge(const FetchStats& other);
};

struct FetchedRange {
  std::string data;
  uint64_t object_size = 0;
  // Local time at which the last byte arrived.
  SimTime ready = 0;
};

// Issues GET requests against the simulated store on behalf of one worker: at most `parallelism` requests in
// flight, one serialized network link at the function bandwidth, and timeout-driven duplicates of slow
// requests where the first completion wins. Duplicates are billed as requests; only the winner's bytes are
// billed as transfer. Throws FetchFailed when every attempt of a range fails or the object is gone.
class RangeFetcher {
 public:
  RangeFetcher(IoContext io, InputOptions options, SimTime start_local);

  FetchedRange Fetch(const std::string& bucket, const std::string& key, uint64_t offset, uint64_t length,
                     SimTime earliest_local);
  FetchedRange FetchSuffix(const std::string& bucket, const std::string& key, uint64_t length,
                           SimTime earliest_local);
  // Fetches every range of a plan into its chunk buffer (sequential issue, parallel execution).
  std::vector<std::string> FetchPlan(const RangeRequestPlan& plan, SimTime earliest_local);

  SimTime RetriggerTimeout() const;
  const FetchStats& Stats() const { return stats_; }
  const IoContext& Io() const { return io_; }

 private:
  FetchedRange Issue(const std::string& bucket, const std::string& key, uint64_t offset, uint64_t length,
                     bool suffix, SimTime earliest_local);
  void Observe(SimTime first_byte_latency);

  IoContext io_;
  InputOptions options_;
  // Times at which request slots become free.
  std::priority_queue<SimTime, std::vector<SimTime>, std::greater<>> slots_;
  SimTime link_free_ = 0;
  // Sorted first-byte latencies of completed requests.
  std::vector<SimTime> observed_;
  SimTime seed_median_ = 0;
  FetchStats stats_;
};

// Reads the footer with a tail probe, plus one more request when the footer does not fit in the probe.
struct FooterRead {
  FileFooter footer;
  uint64_t object_size = 0;
  // The probe bytes and their offset in the object; chunk ranges inside it are served without a request.
  std::string tail;
  uint64_t tail_offset = 0;
  SimTime ready = 0;
  int requests = 0;
};

FooterRead ReadFooter(RangeFetcher& fetcher, const std::string& bucket, const std::string& key,
                      SimTime earliest_local, uint64_t tail_probe_bytes);

struct ScanObject {
  std::string bucket;
  std::string key;
  // Row groups to read; all when empty.
  std::vector<size_t> row_groups;

  bool operator==(const ScanObject&) const = default;
};

struct ScanRequest {
  std::vector<ScanObject> objects;
  std::vector<std::string> columns;
  std::vector<PrunePredicate> predicates;
};

struct ScanBatch {
  RecordBatch batch;
  // Local time at which the batch's input bytes were all fetched.
  SimTime ready = 0;
  // Uncompressed bytes decoded to produce this batch (attributed to a row group's first batch).
  uint64_t decoded_bytes = 0;
};

struct ScanStats {
  FetchStats fetch;
  uint64_t objects = 0;
  uint64_t row_groups_read = 0;
  uint64_t row_groups_pruned = 0;
  uint64_t rows = 0;
};

// Fetches on a background I/O thread and decodes on the calling thread; the two exchange one row group of
// buffers at a time through a bounded queue, so memory stays within a few row groups of projected columns.
// Requests go through the worker's shared fetcher, so consecutive scans contend for the same link.
class InputHandler {
 public:
  InputHandler(RangeFetcher& fetcher, InputOptions options);

  // Calls `consume` on the calling thread for every decoded batch, in object and row-group order.
  void Scan(const ScanRequest& request, SimTime earliest_local, const std::function<void(ScanBatch&&)>& consume);

  const ScanStats& Stats() const { return stats_; }

 private:
  RangeFetcher& fetcher_;
  InputOptions options_;
  ScanStats stats_;
};

}  // namespace skylite
