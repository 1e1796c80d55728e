#include "skylite/storage/columnar_file.hpp"

#include <cstring>

#include <zlib.h>

#include "skylite/common/errors.hpp"

namespace skylite {

namespace {

constexpr int kCompressionLevel = 1;

class ByteWriter {
 public:
  explicit ByteWriter(std::string& out) : out_(out) {}

  template <typename T>
  void Put(T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));  // little-endian hosts only
    out_.append(bytes, sizeof(T));
  }
  void PutString(std::string_view value) {
    Put<uint32_t>(static_cast<uint32_t>(value.size()));
    out_.append(value);
  }

 private:
  std::string& out_;
};

class ByteReader {
 public:
  ByteReader(std::string_view data, std::string_view what) : data_(data), what_(what) {}

  template <typename T>
  T Get() {
    Need(sizeof(T));
    T value;
    std::memcpy(&value, data_.data() + position_, sizeof(T));
    position_ += sizeof(T);
    return value;
  }
  std::string_view GetString() {
    const auto length = Get<uint32_t>();
    Need(length);
    const auto view = data_.substr(position_, length);
    position_ += length;
    return view;
  }
  std::string_view GetBytes(size_t length) {
    Need(length);
    const auto view = data_.substr(position_, length);
    position_ += length;
    return view;
  }
  bool AtEnd() const { return position_ == data_.size(); }

 private:
  void Need(size_t bytes) const {
    if (data_.size() - position_ < bytes) {
      Fail(ErrorCode::kCorruptFile, "truncated " + std::string(what_));
    }
  }

  std::string_view data_;
  std::string_view what_;
  size_t position_ = 0;
};

void PutValue(ByteWriter& writer, const Value& value) {
  switch (value.Type().id) {
    case TypeId::kFloat64:
      writer.Put<double>(value.AsDouble());
      break;
    case TypeId::kString:
      writer.PutString(value.AsString());
      break;
    case TypeId::kBool:
      writer.Put<uint8_t>(value.AsBool() ? 1 : 0);
      break;
    default:
      writer.Put<int64_t>(value.AsInt());
      break;
  }
}

Value GetValue(ByteReader& reader, const DataType& type) {
  switch (type.id) {
    case TypeId::kInt64:
      return Value::Int64(reader.Get<int64_t>());
    case TypeId::kDecimal:
      return Value::Decimal(reader.Get<int64_t>(), type.precision, type.scale);
    case TypeId::kDate:
      return Value::Date(reader.Get<int64_t>());
    case TypeId::kFloat64:
      return Value::Float64(reader.Get<double>());
    case TypeId::kString:
      return Value::String(std::string(reader.GetString()));
    case TypeId::kBool:
      return Value::Bool(reader.Get<uint8_t>() != 0);
    case TypeId::kNull:
      break;
  }
  Fail(ErrorCode::kCorruptFile, "statistics for a null-typed column");
}

// Plain encoding: validity bitmap (nullable columns only), then fixed-width values or length-prefixed strings.
std::string EncodeChunk(const Column& column, bool nullable) {
  std::string out;
  ByteWriter writer(out);
  const size_t rows = column.Size();
  if (nullable) {
    std::string bitmap((rows + 7) / 8, '\0');
    for (size_t row = 0; row < rows; ++row) {
      if (!column.IsNull(row)) bitmap[row / 8] = static_cast<char>(bitmap[row / 8] | (1 << (row % 8)));
    }
    out += bitmap;
  }
  switch (column.Type().id) {
    case TypeId::kInt64:
    case TypeId::kDecimal:
      for (size_t row = 0; row < rows; ++row) writer.Put<int64_t>(column.Int(row));
      break;
    case TypeId::kDate:
      for (size_t row = 0; row < rows; ++row) writer.Put<int32_t>(static_cast<int32_t>(column.Int(row)));
      break;
    case TypeId::kFloat64:
      for (size_t row = 0; row < rows; ++row) writer.Put<double>(column.Float(row));
      break;
    case TypeId::kString:
      for (size_t row = 0; row < rows; ++row) writer.PutString(column.Str(row));
      break;
    case TypeId::kBool:
      for (size_t row = 0; row < rows; ++row) writer.Put<uint8_t>(column.Bool(row) ? 1 : 0);
      break;
    case TypeId::kNull:
      break;
  }
  return out;
}

std::string Compress(const std::string& raw) {
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::string out(bound, '\0');
  const int status = compress2(reinterpret_cast<Bytef*>(out.data()), &bound,
                               reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                               kCompressionLevel);
  Assert(status == Z_OK, "zlib compression failed");
  out.resize(bound);
  return out;
}

std::string Decompress(std::string_view stored, uint64_t uncompressed_length) {
  std::string out(uncompressed_length, '\0');
  uLongf length = static_cast<uLongf>(uncompressed_length);
  const int status = uncompress(reinterpret_cast<Bytef*>(out.data()), &length,
                                reinterpret_cast<const Bytef*>(stored.data()), static_cast<uLong>(stored.size()));
  if (status != Z_OK || length != uncompressed_length) {
    Fail(ErrorCode::kCorruptFile, "chunk decompression failed");
  }
  return out;
}

}  // namespace

uint64_t RowGroupMeta::ByteSize() const {
  uint64_t bytes = 0;
  for (const auto& column : columns) bytes += column.length;
  return bytes;
}

uint64_t FileFooter::TotalRows() const {
  uint64_t rows = 0;
  for (const auto& group : row_groups) rows += group.row_count;
  return rows;
}

std::string SerializeFooter(const FileFooter& footer) {
  std::string out;
  ByteWriter writer(out);
  writer.Put<uint32_t>(static_cast<uint32_t>(footer.schema.Size()));
  for (const auto& field : footer.schema.Fields()) {
    writer.PutString(field.name);
    writer.Put<uint8_t>(static_cast<uint8_t>(field.type.id));
    writer.Put<uint8_t>(field.type.precision);
    writer.Put<uint8_t>(field.type.scale);
    writer.Put<uint8_t>(field.nullable ? 1 : 0);
  }
  writer.Put<uint32_t>(static_cast<uint32_t>(footer.row_groups.size()));
  for (const auto& group : footer.row_groups) {
    writer.Put<uint64_t>(group.row_count);
    for (const auto& chunk : group.columns) {
      writer.Put<uint64_t>(chunk.offset);
      writer.Put<uint64_t>(chunk.length);
      writer.Put<uint8_t>(static_cast<uint8_t>(chunk.encoding));
      writer.Put<uint8_t>(static_cast<uint8_t>(chunk.compression));
      writer.Put<uint64_t>(chunk.uncompressed_length);
      writer.Put<uint64_t>(chunk.null_count);
      writer.Put<uint8_t>(chunk.min.has_value() ? 1 : 0);
      if (chunk.min) {
        PutValue(writer, *chunk.min);
        PutValue(writer, *chunk.max);
      }
    }
  }
  return out;
}

FileFooter ParseFooter(std::string_view bytes) {
  ByteReader reader(bytes, "footer");
  FileFooter footer;
  const auto field_count = reader.Get<uint32_t>();
  std::vector<Field> fields;
  for (uint32_t i = 0; i < field_count; ++i) {
    Field field;
    field.name = std::string(reader.GetString());
    const auto id = reader.Get<uint8_t>();
    if (id > static_cast<uint8_t>(TypeId::kBool)) Fail(ErrorCode::kCorruptFile, "unknown type id in footer");
    field.type.id = static_cast<TypeId>(id);
    field.type.precision = reader.Get<uint8_t>();
    field.type.scale = reader.Get<uint8_t>();
    field.nullable = reader.Get<uint8_t>() != 0;
    fields.push_back(std::move(field));
  }
  footer.schema = Schema(std::move(fields));
  const auto group_count = reader.Get<uint32_t>();
  for (uint32_t g = 0; g < group_count; ++g) {
    RowGroupMeta group;
    group.row_count = reader.Get<uint64_t>();
    for (uint32_t c = 0; c < field_count; ++c) {
      ColumnChunkMeta chunk;
      chunk.offset = reader.Get<uint64_t>();
      chunk.length = reader.Get<uint64_t>();
      const auto encoding = reader.Get<uint8_t>();
      const auto compression = reader.Get<uint8_t>();
      if (encoding != 0 || compression > 1) Fail(ErrorCode::kCorruptFile, "unknown chunk encoding");
      chunk.encoding = static_cast<Encoding>(encoding);
      chunk.compression = static_cast<Compression>(compression);
      chunk.uncompressed_length = reader.Get<uint64_t>();
      chunk.null_count = reader.Get<uint64_t>();
      if (reader.Get<uint8_t>() != 0) {
        chunk.min = GetValue(reader, footer.schema.At(c).type);
        chunk.max = GetValue(reader, footer.schema.At(c).type);
      }
      group.columns.push_back(std::move(chunk));
    }
    footer.row_groups.push_back(std::move(group));
  }
  if (!reader.AtEnd()) Fail(ErrorCode::kCorruptFile, "trailing bytes after footer");
  return footer;
}

uint32_t ReadTrailer(std::string_view tail, uint64_t file_size) {
  if (tail.size() < kColumnarTrailerBytes || file_size < kColumnarMagic.size() + kColumnarTrailerBytes) {
    Fail(ErrorCode::kCorruptFile, "object too small for a columnar file");
  }
  if (tail.substr(tail.size() - kColumnarMagic.size()) != kColumnarMagic) {
    Fail(ErrorCode::kCorruptFile, "bad trailing magic");
  }
  uint32_t length = 0;
  std::memcpy(&length, tail.data() + tail.size() - kColumnarTrailerBytes, sizeof(length));
  if (length > file_size - kColumnarMagic.size() - kColumnarTrailerBytes) {
    Fail(ErrorCode::kCorruptFile, "footer length exceeds file size");
  }
  return length;
}

ColumnarFileWriter::ColumnarFileWriter(Schema schema, WriterOptions options)
    : schema_(std::move(schema)), options_(options), pending_(schema_) {
  if (options_.row_group_rows < 1) Fail(ErrorCode::kInvalidArgument, "row_group_rows must be at least 1");
  data_.append(kColumnarMagic);
}

void ColumnarFileWriter::Append(const RecordBatch& batch) {
  Assert(!finished_, "append after finish");
  if (!(batch.GetSchema() == schema_)) {
    Fail(ErrorCode::kSchemaMismatch, "batch schema " + batch.GetSchema().ToString() + " does not match file schema " +
                                         schema_.ToString());
  }
  batch.Validate();
  size_t offset = 0;
  while (offset < batch.NumRows()) {
    const size_t take = std::min(batch.NumRows() - offset, options_.row_group_rows - pending_.NumRows());
    if (pending_.NumRows() == 0 && take == options_.row_group_rows) {
      FlushRowGroup(offset == 0 && take == batch.NumRows() ? batch : batch.Slice(offset, take));
    } else {
      for (size_t row = offset; row < offset + take; ++row) pending_.AppendRow(batch, row);
      if (pending_.NumRows() == options_.row_group_rows) {
        FlushRowGroup(pending_);
        pending_ = RecordBatch(schema_);
      }
    }
    offset += take;
  }
}

void ColumnarFileWriter::FlushRowGroup(const RecordBatch& rows) {
  RowGroupMeta group;
  group.row_count = rows.NumRows();
  for (size_t c = 0; c < schema_.Size(); ++c) {
    const auto& column = rows.column(c);
    ColumnChunkMeta chunk;
    const std::string raw = EncodeChunk(column, schema_.At(c).nullable);
    chunk.uncompressed_length = raw.size();
    chunk.compression = options_.compression;
    const std::string stored = options_.compression == Compression::kZlib ? Compress(raw) : raw;
    chunk.offset = data_.size();
    chunk.length = stored.size();
    chunk.null_count = column.NullCount();
    for (size_t row = 0; row < column.Size(); ++row) {
      if (column.IsNull(row)) continue;
      Value value = column.GetValue(row);
      if (!chunk.min || value.Compare(*chunk.min) < 0) chunk.min = value;
      if (!chunk.max || value.Compare(*chunk.max) > 0) chunk.max = std::move(value);
    }
    data_ += stored;
    group.columns.push_back(std::move(chunk));
  }
  rows_written_ += rows.NumRows();
  row_groups_.push_back(std::move(group));
}

std::string ColumnarFileWriter::Finish() {
  Assert(!finished_, "finish called twice");
  if (pending_.NumRows() > 0) FlushRowGroup(pending_);
  finished_ = true;
  FileFooter footer{schema_, std::move(row_groups_)};
  const std::string serialized = SerializeFooter(footer);
  data_ += serialized;
  ByteWriter writer(data_);
  writer.Put<uint32_t>(static_cast<uint32_t>(serialized.size()));
  data_.append(kColumnarMagic);
  return std::move(data_);
}

std::string WriteColumnarFile(const Schema& schema, const std::vector<RecordBatch>& batches, WriterOptions options) {
  ColumnarFileWriter writer(schema, options);
  for (const auto& batch : batches) writer.Append(batch);
  return writer.Finish();
}

Column DecodeChunk(std::string_view stored, const ColumnChunkMeta& meta, const Field& field, uint64_t rows) {
  if (stored.size() != meta.length) Fail(ErrorCode::kCorruptFile, "chunk length mismatch for " + field.name);
  std::string decompressed;
  std::string_view raw = stored;
  if (meta.compression == Compression::kZlib) {
    decompressed = Decompress(stored, meta.uncompressed_length);
    raw = decompressed;
  }
  ByteReader reader(raw, "column chunk " + field.name);
  std::string_view bitmap;
  if (field.nullable) bitmap = reader.GetBytes((rows + 7) / 8);
  const auto is_null = [&](uint64_t row) {
    return field.nullable && (static_cast<uint8_t>(bitmap[row / 8]) & (1 << (row % 8))) == 0;
  };
  Column column(field.type);
  column.Reserve(rows);
  for (uint64_t row = 0; row < rows; ++row) {
    switch (field.type.id) {
      case TypeId::kInt64:
      case TypeId::kDecimal: {
        const auto value = reader.Get<int64_t>();
        is_null(row) ? column.AppendNull() : column.AppendInt(value);
        break;
      }
      case TypeId::kDate: {
        const auto value = reader.Get<int32_t>();
        is_null(row) ? column.AppendNull() : column.AppendInt(value);
        break;
      }
      case TypeId::kFloat64: {
        const auto value = reader.Get<double>();
        is_null(row) ? column.AppendNull() : column.AppendFloat(value);
        break;
      }
      case TypeId::kString: {
        const auto value = reader.GetString();
        is_null(row) ? column.AppendNull() : column.AppendString(std::string(value));
        break;
      }
      case TypeId::kBool: {
        const auto value = reader.Get<uint8_t>();
        is_null(row) ? column.AppendNull() : column.AppendBool(value != 0);
        break;
      }
      case TypeId::kNull:
        column.AppendNull();
        break;
    }
  }
  if (!reader.AtEnd()) Fail(ErrorCode::kCorruptFile, "trailing bytes in chunk " + field.name);
  if (column.NullCount() != meta.null_count) Fail(ErrorCode::kCorruptFile, "null count mismatch in " + field.name);
  return column;
}

FileFooter ReadFooterFromFile(std::string_view file) {
  if (file.size() < kColumnarMagic.size() || file.substr(0, kColumnarMagic.size()) != kColumnarMagic) {
    Fail(ErrorCode::kCorruptFile, "bad leading magic");
  }
  const uint32_t length = ReadTrailer(file.substr(file.size() - std::min(file.size(), kColumnarTrailerBytes)),
                                      file.size());
  return ParseFooter(file.substr(file.size() - kColumnarTrailerBytes - length, length));
}

std::vector<RecordBatch> ReadColumnarFile(std::string_view file, const std::vector<std::string>& columns,
                                          size_t batch_size) {
  const FileFooter footer = ReadFooterFromFile(file);
  std::vector<size_t> indices;
  if (columns.empty()) {
    for (size_t i = 0; i < footer.schema.Size(); ++i) indices.push_back(i);
  } else {
    for (const auto& name : columns) indices.push_back(footer.schema.IndexOrFail(name));
  }
  const Schema projected = footer.schema.Select(indices);
  std::vector<RecordBatch> batches;
  for (const auto& group : footer.row_groups) {
    std::vector<Column> decoded;
    for (const auto index : indices) {
      const auto& meta = group.columns[index];
      if (meta.offset + meta.length > file.size()) Fail(ErrorCode::kCorruptFile, "chunk outside file");
      decoded.push_back(DecodeChunk(file.substr(meta.offset, meta.length), meta, footer.schema.At(index),
                                    group.row_count));
    }
    RecordBatch whole(projected, std::move(decoded));
    if (indices.empty()) {
      // Zero projected columns still carry a row count.
      for (uint64_t row = 0; row < group.row_count; ++row) whole.AppendRow(std::vector<Value>{});
    }
    for (size_t offset = 0; offset < group.row_count; offset += batch_size) {
      const size_t length = std::min<size_t>(batch_size, group.row_count - offset);
      batches.push_back(length == group.row_count ? whole : whole.Slice(offset, length));
    }
  }
  return batches;
}

int CompareForPruning(const Value& a, const Value& b) {
  const auto& ta = a.Type();
  const auto& tb = b.Type();
  const auto sign = [](auto x) { return x < 0 ? -1 : (x > 0 ? 1 : 0); };
  if (ta.id == TypeId::kFloat64 || tb.id == TypeId::kFloat64) {
    const auto as_double = [](const Value& v) {
      if (v.Type().id == TypeId::kFloat64) return v.AsDouble();
      return static_cast<double>(v.AsInt()) / static_cast<double>(decimals::Pow10(v.Type().scale));
    };
    const double x = as_double(a);
    const double y = as_double(b);
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  if (ta.IsIntegerBacked() && tb.IsIntegerBacked()) {
    const int sa = ta.id == TypeId::kDecimal ? ta.scale : 0;
    const int sb = tb.id == TypeId::kDecimal ? tb.scale : 0;
    const int scale = std::max(sa, sb);
    const __int128 x = static_cast<__int128>(a.AsInt()) * decimals::Pow10(scale - sa);
    const __int128 y = static_cast<__int128>(b.AsInt()) * decimals::Pow10(scale - sb);
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  if (ta.id == TypeId::kString && tb.id == TypeId::kString) return sign(a.AsString().compare(b.AsString()));
  if (ta.id == TypeId::kBool && tb.id == TypeId::kBool) return static_cast<int>(a.AsBool()) - b.AsBool();
  Fail(ErrorCode::kTypeMismatch, "cannot compare " + ta.ToString() + " with " + tb.ToString());
}

bool RowGroupMayMatch(const FileFooter& footer, size_t row_group, const std::vector<PrunePredicate>& predicates) {
  const auto& group = footer.row_groups.at(row_group);
  for (const auto& predicate : predicates) {
    const int index = footer.schema.IndexOf(predicate.column);
    if (index < 0 || predicate.literal.IsNull()) continue;
    const auto& chunk = group.columns[index];
    if (!chunk.min) {
      // Only nulls: no comparison can hold.
      if (group.row_count > 0) return false;
      continue;
    }
    const int lo = CompareForPruning(*chunk.min, predicate.literal);
    const int hi = CompareForPruning(*chunk.max, predicate.literal);
    bool possible = true;
    switch (predicate.op) {
      case PruneOp::kEq:
        possible = lo <= 0 && hi >= 0;
        break;
      case PruneOp::kLt:
        possible = lo < 0;
        break;
      case PruneOp::kLe:
        possible = lo <= 0;
        break;
      case PruneOp::kGt:
        possible = hi > 0;
        break;
      case PruneOp::kGe:
        possible = hi >= 0;
        break;
    }
    if (!possible) return false;
  }
  return true;
}

}  // namespace skylite
