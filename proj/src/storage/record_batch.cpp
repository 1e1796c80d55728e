#include "skylite/storage/record_batch.hpp"

#include <cstring>
#include <sstream>

#include "skylite/common/errors.hpp"
#include "skylite/common/hashing.hpp"

namespace skylite {

namespace {

constexpr uint64_t kNullHash = 0x6e756c6c6e756c6cULL;

enum class Storage { kInts, kFloats, kStrings, kBools };

Storage StorageOf(const DataType& type) {
  switch (type.id) {
    case TypeId::kFloat64:
      return Storage::kFloats;
    case TypeId::kString:
      return Storage::kStrings;
    case TypeId::kBool:
      return Storage::kBools;
    default:
      return Storage::kInts;
  }
}

}  // namespace

Column::Column(DataType type) : type_(type) {}

void Column::MarkValid() {
  if (!nulls_.empty()) nulls_.push_back(0);
  ++size_;
}

void Column::AppendInt(int64_t value) {
  ints_.push_back(value);
  MarkValid();
}

void Column::AppendFloat(double value) {
  floats_.push_back(value);
  MarkValid();
}

void Column::AppendString(std::string value) {
  strings_.push_back(std::move(value));
  MarkValid();
}

void Column::AppendBool(bool value) {
  bools_.push_back(value ? 1 : 0);
  MarkValid();
}

void Column::AppendNull() {
  switch (StorageOf(type_)) {
    case Storage::kInts:
      ints_.push_back(0);
      break;
    case Storage::kFloats:
      floats_.push_back(0);
      break;
    case Storage::kStrings:
      strings_.emplace_back();
      break;
    case Storage::kBools:
      bools_.push_back(0);
      break;
  }
  if (nulls_.empty()) nulls_.assign(size_, 0);
  nulls_.push_back(1);
  ++null_count_;
  ++size_;
}

void Column::Append(const Value& value) {
  if (value.IsNull()) {
    AppendNull();
    return;
  }
  switch (type_.id) {
    case TypeId::kInt64:
    case TypeId::kDate:
      if (!value.Type().IsIntegerBacked() || value.Type().id == TypeId::kDecimal) {
        Fail(ErrorCode::kSchemaMismatch, "cannot store " + value.Type().ToString() + " in " + type_.ToString());
      }
      AppendInt(value.AsInt());
      return;
    case TypeId::kDecimal:
      if (value.Type().id == TypeId::kDecimal) {
        AppendInt(decimals::Rescale(value.AsInt(), value.Type().scale, type_.scale));
      } else if (value.Type().id == TypeId::kInt64) {
        AppendInt(decimals::Rescale(value.AsInt(), 0, type_.scale));
      } else {
        Fail(ErrorCode::kSchemaMismatch, "cannot store " + value.Type().ToString() + " in " + type_.ToString());
      }
      return;
    case TypeId::kFloat64:
      if (value.Type().id != TypeId::kFloat64) {
        Fail(ErrorCode::kSchemaMismatch, "cannot store " + value.Type().ToString() + " in float64");
      }
      AppendFloat(value.AsDouble());
      return;
    case TypeId::kString:
      if (value.Type().id != TypeId::kString) {
        Fail(ErrorCode::kSchemaMismatch, "cannot store " + value.Type().ToString() + " in string");
      }
      AppendString(value.AsString());
      return;
    case TypeId::kBool:
      if (value.Type().id != TypeId::kBool) {
        Fail(ErrorCode::kSchemaMismatch, "cannot store " + value.Type().ToString() + " in bool");
      }
      AppendBool(value.AsBool());
      return;
    case TypeId::kNull:
      Fail(ErrorCode::kSchemaMismatch, "cannot store a non-null value in a null column");
  }
}

void Column::AppendFrom(const Column& other, size_t row) {
  if (other.IsNull(row)) {
    AppendNull();
    return;
  }
  switch (StorageOf(type_)) {
    case Storage::kInts:
      AppendInt(other.ints_[row]);
      break;
    case Storage::kFloats:
      AppendFloat(other.floats_[row]);
      break;
    case Storage::kStrings:
      AppendString(other.strings_[row]);
      break;
    case Storage::kBools:
      AppendBool(other.bools_[row] != 0);
      break;
  }
}

void Column::Reserve(size_t rows) {
  switch (StorageOf(type_)) {
    case Storage::kInts:
      ints_.reserve(rows);
      break;
    case Storage::kFloats:
      floats_.reserve(rows);
      break;
    case Storage::kStrings:
      strings_.reserve(rows);
      break;
    case Storage::kBools:
      bools_.reserve(rows);
      break;
  }
}

Value Column::GetValue(size_t row) const {
  if (IsNull(row)) return Value::Null(type_);
  switch (type_.id) {
    case TypeId::kInt64:
      return Value::Int64(ints_[row]);
    case TypeId::kDecimal:
      return Value::Decimal(ints_[row], type_.precision, type_.scale);
    case TypeId::kDate:
      return Value::Date(ints_[row]);
    case TypeId::kFloat64:
      return Value::Float64(floats_[row]);
    case TypeId::kString:
      return Value::String(strings_[row]);
    case TypeId::kBool:
      return Value::Bool(bools_[row] != 0);
    case TypeId::kNull:
      return Value::Null();
  }
  return Value::Null();
}

Column Column::Take(const std::vector<uint32_t>& rows) const {
  Column result(type_);
  result.Reserve(rows.size());
  for (const auto row : rows) result.AppendFrom(*this, row);
  return result;
}

Column Column::Slice(size_t offset, size_t length) const {
  Column result(type_);
  result.Reserve(length);
  for (size_t row = offset; row < offset + length; ++row) result.AppendFrom(*this, row);
  return result;
}

uint64_t Column::HashAt(size_t row, uint64_t seed) const {
  if (IsNull(row)) return CombineHash(seed, kNullHash);
  switch (StorageOf(type_)) {
    case Storage::kInts:
      return CombineHash(seed, static_cast<uint64_t>(ints_[row]));
    case Storage::kFloats: {
      double value = floats_[row];
      if (value == 0.0) value = 0.0;  // -0.0 and 0.0 hash alike
      uint64_t bits = 0;
      std::memcpy(&bits, &value, sizeof(bits));
      return CombineHash(seed, bits);
    }
    case Storage::kStrings:
      return CombineHash(seed, StableHash64(strings_[row]));
    case Storage::kBools:
      return CombineHash(seed, bools_[row]);
  }
  return seed;
}

bool Column::EqualAt(size_t row, const Column& other, size_t other_row) const {
  return CompareAt(row, other, other_row) == 0;
}

int Column::CompareAt(size_t row, const Column& other, size_t other_row) const {
  const bool a_null = IsNull(row);
  const bool b_null = other.IsNull(other_row);
  if (a_null || b_null) return a_null == b_null ? 0 : (a_null ? -1 : 1);
  switch (StorageOf(type_)) {
    case Storage::kInts: {
      const int64_t a = ints_[row];
      const int64_t b = other.ints_[other_row];
      return a < b ? -1 : (a > b ? 1 : 0);
    }
    case Storage::kFloats: {
      const double a = floats_[row];
      const double b = other.floats_[other_row];
      return a < b ? -1 : (a > b ? 1 : 0);
    }
    case Storage::kStrings: {
      const int c = strings_[row].compare(other.strings_[other_row]);
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case Storage::kBools:
      return static_cast<int>(bools_[row]) - static_cast<int>(other.bools_[other_row]);
  }
  return 0;
}

uint64_t Column::ByteSize() const {
  uint64_t bytes = ints_.size() * 8 + floats_.size() * 8 + bools_.size() + nulls_.size();
  for (const auto& s : strings_) bytes += s.size() + 4;
  return bytes;
}

RecordBatch::RecordBatch(Schema schema) : schema_(std::move(schema)) {
  columns_.reserve(schema_.Size());
  for (const auto& field : schema_.Fields()) columns_.emplace_back(field.type);
}

RecordBatch::RecordBatch(Schema schema, std::vector<Column> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {
  SyncRowCount();
  Validate();
}

void RecordBatch::SyncRowCount() { rows_ = columns_.empty() ? rows_ : columns_.front().Size(); }

RecordBatch RecordBatch::Take(const std::vector<uint32_t>& rows) const {
  std::vector<Column> columns;
  columns.reserve(columns_.size());
  for (const auto& column : columns_) columns.push_back(column.Take(rows));
  RecordBatch result(schema_, std::move(columns));
  result.rows_ = rows.size();
  return result;
}

RecordBatch RecordBatch::Slice(size_t offset, size_t length) const {
  std::vector<Column> columns;
  columns.reserve(columns_.size());
  for (const auto& column : columns_) columns.push_back(column.Slice(offset, length));
  RecordBatch result(schema_, std::move(columns));
  result.rows_ = length;
  return result;
}

RecordBatch RecordBatch::Select(const std::vector<size_t>& indices) const {
  std::vector<Column> columns;
  columns.reserve(indices.size());
  for (const auto index : indices) columns.push_back(columns_.at(index));
  RecordBatch result(schema_.Select(indices), std::move(columns));
  result.rows_ = rows_;
  return result;
}

void RecordBatch::AppendRow(const RecordBatch& other, size_t row) {
  for (size_t i = 0; i < columns_.size(); ++i) columns_[i].AppendFrom(other.columns_[i], row);
  ++rows_;
}

void RecordBatch::AppendRow(const std::vector<Value>& row) {
  if (row.size() != columns_.size()) {
    Fail(ErrorCode::kSchemaMismatch, "row arity " + std::to_string(row.size()) + " does not match schema " +
                                         schema_.ToString());
  }
  for (size_t i = 0; i < columns_.size(); ++i) columns_[i].Append(row[i]);
  ++rows_;
}

std::vector<Value> RecordBatch::Row(size_t row) const {
  std::vector<Value> values;
  values.reserve(columns_.size());
  for (const auto& column : columns_) values.push_back(column.GetValue(row));
  return values;
}

uint64_t RecordBatch::ByteSize() const {
  uint64_t bytes = 0;
  for (const auto& column : columns_) bytes += column.ByteSize();
  return bytes;
}

void RecordBatch::Validate() const {
  if (columns_.size() != schema_.Size()) {
    Fail(ErrorCode::kSchemaMismatch, "batch has " + std::to_string(columns_.size()) + " columns, schema " +
                                         schema_.ToString());
  }
  for (size_t i = 0; i < columns_.size(); ++i) {
    const auto& field = schema_.At(i);
    if (!(columns_[i].Type() == field.type)) {
      Fail(ErrorCode::kSchemaMismatch, "column " + field.name + " has type " + columns_[i].Type().ToString() +
                                           ", expected " + field.type.ToString());
    }
    if (columns_[i].Size() != rows_) {
      Fail(ErrorCode::kSchemaMismatch, "column " + field.name + " has " + std::to_string(columns_[i].Size()) +
                                           " rows, expected " + std::to_string(rows_));
    }
    if (!field.nullable && columns_[i].HasNulls()) {
      Fail(ErrorCode::kSchemaMismatch, "non-nullable column " + field.name + " contains nulls");
    }
  }
}

std::string RecordBatch::ToString(size_t max_rows) const {
  std::ostringstream out;
  for (size_t i = 0; i < schema_.Size(); ++i) out << (i ? " | " : "") << schema_.At(i).name;
  out << "\n";
  for (size_t row = 0; row < std::min(rows_, max_rows); ++row) {
    for (size_t i = 0; i < columns_.size(); ++i) out << (i ? " | " : "") << columns_[i].GetValue(row).ToString();
    out << "\n";
  }
  if (rows_ > max_rows) out << "... (" << rows_ << " rows)\n";
  return out.str();
}

}  // namespace skylite
