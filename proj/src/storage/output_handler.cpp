#include "skylite/storage/output_handler.hpp"

#include "skylite/common/errors.hpp"

namespace skylite {

std::string OutputObjectKey(const std::string& query_id, int pipeline, int fragment, int partition) {
  return "queries/" + query_id + "/p" + std::to_string(pipeline) + "/f" + std::to_string(fragment) + "/part" +
         std::to_string(partition) + ".skyc";
}

OutputHandler::OutputHandler(Schema schema, WriterOptions options) : writer_(std::move(schema), options) {}

void OutputHandler::Append(const RecordBatch& batch) {
  Assert(!finalized_, "append after finalize");
  writer_.Append(batch);
}

OutputReceipt OutputHandler::Finalize(const IoContext& io, SimTime local_now, const std::string& bucket,
                                      const std::string& key, StorageClass storage_class, int max_attempts) {
  Assert(!finalized_, "output finalized twice");
  finalized_ = true;
  OutputReceipt receipt;
  receipt.bucket = bucket;
  receipt.key = key;
  receipt.rows = writer_.RowsWritten();
  const std::string bytes = writer_.Finish();
  receipt.bytes = bytes.size();
  SimTime at = local_now;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    receipt.attempts = attempt;
    const auto put = io.sim->PutObject(io.At(at), bucket, key, bytes, storage_class);
    at += put.latency;
    if (!put.failed) {
      receipt.done = at;
      return receipt;
    }
  }
  Fail(ErrorCode::kFetchFailed, "all " + std::to_string(max_attempts) + " attempts to write " + key + " failed");
}

}  // namespace skylite
