#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include <json.hpp>

#include "skylite/common/types.hpp"

namespace skylite {

// A typed scalar. Integer-backed types (int64, decimal, date) hold an int64; a decimal holds its scaled value.
class Value {
 public:
  Value() = default;

  static Value Null(DataType type = DataType::Null());
  static Value Int64(int64_t value);
  static Value Float64(double value);
  static Value Decimal(int64_t scaled, uint8_t precision, uint8_t scale);
  static Value String(std::string value);
  static Value Date(int64_t days);
  static Value Bool(bool value);

  const DataType& Type() const { return type_; }
  bool IsNull() const { return std::holds_alternative<std::monostate>(data_); }
  int64_t AsInt() const { return std::get<int64_t>(data_); }
  double AsDouble() const { return std::get<double>(data_); }
  const std::string& AsString() const { return std::get<std::string>(data_); }
  bool AsBool() const { return std::get<bool>(data_); }

  // Orders values of the same type; decimals of different scales compare numerically. Nulls sort first.
  int Compare(const Value& other) const;
  // Human-readable rendering: decimals with their scale, dates as YYYY-MM-DD.
  std::string ToString() const;

  nlohmann::json ToJson() const;
  static Value FromJson(const nlohmann::json& json);

  bool operator==(const Value& other) const { return type_ == other.type_ && data_ == other.data_; }

 private:
  DataType type_;
  std::variant<std::monostate, int64_t, double, std::string, bool> data_;
};

}  // namespace skylite
