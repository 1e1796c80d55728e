#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace skylite {

enum class TypeId : uint8_t { kNull = 0, kInt64 = 1, kFloat64 = 2, kDecimal = 3, kString = 4, kDate = 5, kBool = 6 };

constexpr uint8_t kMaxDecimalPrecision = 18;

// Decimals are 18-digit scaled integers; dates are days since 1970-01-01.
struct DataType {
  TypeId id = TypeId::kNull;
  uint8_t precision = 0;
  uint8_t scale = 0;

  static DataType Null() { return {TypeId::kNull, 0, 0}; }
  static DataType Int64() { return {TypeId::kInt64, 0, 0}; }
  static DataType Float64() { return {TypeId::kFloat64, 0, 0}; }
  static DataType Decimal(uint8_t precision, uint8_t scale);
  static DataType String() { return {TypeId::kString, 0, 0}; }
  static DataType Date() { return {TypeId::kDate, 0, 0}; }
  static DataType Bool() { return {TypeId::kBool, 0, 0}; }

  // Accepts the output of ToString(), e.g. "decimal(15,2)".
  static DataType Parse(std::string_view text);

  bool IsNumeric() const { return id == TypeId::kInt64 || id == TypeId::kFloat64 || id == TypeId::kDecimal; }
  // Int64, decimal and date share the int64 in-memory representation.
  bool IsIntegerBacked() const { return id == TypeId::kInt64 || id == TypeId::kDecimal || id == TypeId::kDate; }
  std::string ToString() const;

  bool operator==(const DataType&) const = default;
};

struct Field {
  std::string name;
  DataType type;
  bool nullable = false;

  bool operator==(const Field&) const = default;
};

class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<Field> fields);

  const std::vector<Field>& Fields() const { return fields_; }
  const Field& At(size_t index) const { return fields_.at(index); }
  size_t Size() const { return fields_.size(); }
  bool Empty() const { return fields_.empty(); }

  // -1 when absent.
  int IndexOf(std::string_view name) const;
  // Throws UnknownColumn when absent.
  size_t IndexOrFail(std::string_view name) const;
  void Append(Field field);
  Schema Select(const std::vector<size_t>& indices) const;
  std::string ToString() const;

  bool operator==(const Schema&) const = default;

 private:
  std::vector<Field> fields_;
};

namespace dates {

int64_t DaysFromCivil(int64_t year, unsigned month, unsigned day);
void CivilFromDays(int64_t days, int64_t& year, unsigned& month, unsigned& day);
// "YYYY-MM-DD" -> days; throws InvalidArgument.
int64_t Parse(std::string_view text);
std::string Format(int64_t days);
// Calendar month arithmetic; the day of month is clamped to the target month's length.
int64_t AddMonths(int64_t days, int64_t months);

}  // namespace dates

namespace decimals {

int64_t Pow10(int exponent);
// Multiplies by 10^(to_scale - from_scale); only widening is exact. Throws on overflow.
int64_t Rescale(int64_t value, int from_scale, int to_scale);
// numerator / denominator, rounded half to even.
int64_t DivideRoundHalfEven(__int128 numerator, __int128 denominator);
int64_t CheckedAdd(int64_t a, int64_t b);
int64_t CheckedMul(int64_t a, int64_t b);
std::string Format(int64_t value, int scale);
// Parses "12.345" to (12345, scale 3).
bool ParseLiteral(std::string_view text, int64_t& value, int& scale);

}  // namespace decimals

}  // namespace skylite
