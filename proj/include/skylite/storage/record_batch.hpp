#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skylite/common/types.hpp"
#include "skylite/common/value.hpp"

namespace skylite {

constexpr size_t kDefaultBatchSize = 4096;

// A typed vector with an optional null mask. Integer-backed types (int64, decimal, date) and the null type
// store int64; strings, floats and bools have their own storage.
class Column {
 public:
  Column() = default;
  explicit Column(DataType type);

  const DataType& Type() const { return type_; }
  size_t Size() const { return size_; }
  size_t NullCount() const { return null_count_; }
  bool HasNulls() const { return null_count_ > 0; }
  bool IsNull(size_t row) const { return !nulls_.empty() && nulls_[row] != 0; }

  int64_t Int(size_t row) const { return ints_[row]; }
  double Float(size_t row) const { return floats_[row]; }
  const std::string& Str(size_t row) const { return strings_[row]; }
  bool Bool(size_t row) const { return bools_[row] != 0; }
  Value GetValue(size_t row) const;

  void AppendInt(int64_t value);
  void AppendFloat(double value);
  void AppendString(std::string value);
  void AppendBool(bool value);
  void AppendNull();
  // Value must match the column type (decimals are rescaled to the column scale).
  void Append(const Value& value);
  void AppendFrom(const Column& other, size_t row);
  void Reserve(size_t rows);

  Column Take(const std::vector<uint32_t>& rows) const;
  Column Slice(size_t offset, size_t length) const;

  // Hash and comparison of single cells; nulls hash to a fixed value and compare first.
  uint64_t HashAt(size_t row, uint64_t seed) const;
  bool EqualAt(size_t row, const Column& other, size_t other_row) const;
  int CompareAt(size_t row, const Column& other, size_t other_row) const;

  // Approximate in-memory footprint, used for budgets and statistics.
  uint64_t ByteSize() const;

  const std::vector<int64_t>& Ints() const { return ints_; }
  const std::vector<double>& Floats() const { return floats_; }
  const std::vector<std::string>& Strings() const { return strings_; }
  const std::vector<uint8_t>& Bools() const { return bools_; }

 private:
  void MarkValid();

  DataType type_;
  size_t size_ = 0;
  std::vector<int64_t> ints_;
  std::vector<double> floats_;
  std::vector<std::string> strings_;
  std::vector<uint8_t> bools_;
  // Allocated on the first null; 1 marks a null row.
  std::vector<uint8_t> nulls_;
  size_t null_count_ = 0;
};

class RecordBatch {
 public:
  RecordBatch() = default;
  explicit RecordBatch(Schema schema);
  RecordBatch(Schema schema, std::vector<Column> columns);

  const Schema& GetSchema() const { return schema_; }
  size_t NumRows() const { return rows_; }
  size_t NumColumns() const { return columns_.size(); }
  const Column& column(size_t index) const { return columns_.at(index); }
  Column& MutableColumn(size_t index) { return columns_.at(index); }
  const std::vector<Column>& Columns() const { return columns_; }

  RecordBatch Take(const std::vector<uint32_t>& rows) const;
  RecordBatch Slice(size_t offset, size_t length) const;
  RecordBatch Select(const std::vector<size_t>& indices) const;
  void AppendRow(const RecordBatch& other, size_t row);
  void AppendRow(const std::vector<Value>& row);
  // Recomputes the row count after columns were appended to directly.
  void SyncRowCount();

  std::vector<Value> Row(size_t row) const;
  uint64_t ByteSize() const;
  // Throws SchemaMismatch when column count, types or lengths disagree with the schema.
  void Validate() const;
  std::string ToString(size_t max_rows = 20) const;

 private:
  Schema schema_;
  std::vector<Column> columns_;
  size_t rows_ = 0;
};

}  // namespace skylite
