#pragma once

#include <cstdint>
#include <string>

#include "skylite/storage/columnar_file.hpp"
#include "skylite/storage/input_handler.hpp"

namespace skylite {

// Deterministic object key of one fragment's output partition.
std::string OutputObjectKey(const std::string& query_id, int pipeline, int fragment, int partition);

struct OutputReceipt {
  std::string bucket;
  std::string key;
  uint64_t bytes = 0;
  uint64_t rows = 0;
  // Local time at which the write was acknowledged.
  SimTime done = 0;
  int attempts = 0;
};

// Serializes and compresses batches as they arrive and writes the whole result as a single object.
class OutputHandler {
 public:
  explicit OutputHandler(Schema schema, WriterOptions options = {});

  void Append(const RecordBatch& batch);
  uint64_t Rows() const { return writer_.RowsWritten(); }
  const Schema& GetSchema() const { return writer_.GetSchema(); }

  // Writes the object, retrying injected write failures up to `max_attempts` times (then FetchFailed).
  OutputReceipt Finalize(const IoContext& io, SimTime local_now, const std::string& bucket, const std::string& key,
                         StorageClass storage_class = StorageClass::kStandard, int max_attempts = 4);

 private:
  ColumnarFileWriter writer_;
  bool finalized_ = false;
};

}  // namespace skylite
