#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skylite/common/types.hpp"
#include "skylite/common/value.hpp"
#include "skylite/storage/record_batch.hpp"

namespace skylite {

// Layout: "SKYC1" | column chunks, row group major | footer | u32 LE footer length | "SKYC1".
constexpr std::string_view kColumnarMagic = "SKYC1";
constexpr size_t kColumnarTrailerBytes = 4 + 5;

enum class Encoding : uint8_t { kPlain = 0 };
enum class Compression : uint8_t { kNone = 0, kZlib = 1 };

struct ColumnChunkMeta {
  uint64_t offset = 0;
  uint64_t length = 0;
  Encoding encoding = Encoding::kPlain;
  Compression compression = Compression::kNone;
  uint64_t uncompressed_length = 0;
  uint64_t null_count = 0;
  // Absent when every value is null.
  std::optional<Value> min;
  std::optional<Value> max;

  bool operator==(const ColumnChunkMeta&) const = default;
};

struct RowGroupMeta {
  uint64_t row_count = 0;
  std::vector<ColumnChunkMeta> columns;

  uint64_t ByteSize() const;
  bool operator==(const RowGroupMeta&) const = default;
};

struct FileFooter {
  Schema schema;
  std::vector<RowGroupMeta> row_groups;

  uint64_t TotalRows() const;
  bool operator==(const FileFooter&) const = default;
};

std::string SerializeFooter(const FileFooter& footer);
// Throws CorruptFile.
FileFooter ParseFooter(std::string_view bytes);
// Footer length from the last 9 bytes of a file; throws CorruptFile on a bad trailer.
uint32_t ReadTrailer(std::string_view tail, uint64_t file_size);

struct WriterOptions {
  size_t row_group_rows = 32768;
  Compression compression = Compression::kZlib;
};

// Buffers at most one row group of input; each completed row group is encoded and compressed on arrival.
class ColumnarFileWriter {
 public:
  explicit ColumnarFileWriter(Schema schema, WriterOptions options = {});

  // Throws SchemaMismatch.
  void Append(const RecordBatch& batch);
  // Returns the complete file; the writer is unusable afterwards.
  std::string Finish();

  const Schema& GetSchema() const { return schema_; }
  uint64_t RowsWritten() const { return rows_written_ + pending_.NumRows(); }
  uint64_t BytesWritten() const { return data_.size(); }

 private:
  void FlushRowGroup(const RecordBatch& rows);

  Schema schema_;
  WriterOptions options_;
  std::string data_;
  RecordBatch pending_;
  std::vector<RowGroupMeta> row_groups_;
  uint64_t rows_written_ = 0;
  bool finished_ = false;
};

std::string WriteColumnarFile(const Schema& schema, const std::vector<RecordBatch>& batches,
                              WriterOptions options = {});

// Decodes one stored chunk (compressed bytes) into a column. Throws CorruptFile.
Column DecodeChunk(std::string_view stored, const ColumnChunkMeta& meta, const Field& field, uint64_t rows);

// Parses a complete in-memory file.
FileFooter ReadFooterFromFile(std::string_view file);
// Decodes every row of the selected columns (all when empty) of a complete in-memory file.
std::vector<RecordBatch> ReadColumnarFile(std::string_view file, const std::vector<std::string>& columns = {},
                                          size_t batch_size = kDefaultBatchSize);

// A "column op literal" conjunct used to skip row groups from their statistics.
enum class PruneOp { kEq, kLt, kLe, kGt, kGe };

struct PrunePredicate {
  std::string column;
  PruneOp op = PruneOp::kEq;
  Value literal;

  bool operator==(const PrunePredicate&) const = default;
};

// Three-way comparison across int64/decimal/float/date/string/bool values; decimals compare exactly.
int CompareForPruning(const Value& a, const Value& b);
// False only when the statistics prove that no row of the group satisfies every predicate.
bool RowGroupMayMatch(const FileFooter& footer, size_t row_group, const std::vector<PrunePredicate>& predicates);

}  // namespace skylite
