#include "skylite/common/value.hpp"

#include <cmath>
#include <sstream>

#include "skylite/common/errors.hpp"

namespace skylite {

Value Value::Null(DataType type) {
  Value value;
  value.type_ = type;
  return value;
}

Value Value::Int64(int64_t value) {
  Value result;
  result.type_ = DataType::Int64();
  result.data_ = value;
  return result;
}

Value Value::Float64(double value) {
  Value result;
  result.type_ = DataType::Float64();
  result.data_ = value;
  return result;
}

Value Value::Decimal(int64_t scaled, uint8_t precision, uint8_t scale) {
  Value result;
  result.type_ = DataType::Decimal(precision, scale);
  result.data_ = scaled;
  return result;
}

Value Value::String(std::string value) {
  Value result;
  result.type_ = DataType::String();
  result.data_ = std::move(value);
  return result;
}

Value Value::Date(int64_t days) {
  Value result;
  result.type_ = DataType::Date();
  result.data_ = days;
  return result;
}

Value Value::Bool(bool value) {
  Value result;
  result.type_ = DataType::Bool();
  result.data_ = value;
  return result;
}

namespace {

template <typename T>
int ThreeWay(const T& a, const T& b) {
  return a < b ? -1 : (b < a ? 1 : 0);
}

}  // namespace

int Value::Compare(const Value& other) const {
  if (IsNull() || other.IsNull()) {
    return ThreeWay(!IsNull(), !other.IsNull());
  }
  if (type_.id == TypeId::kDecimal && other.type_.id == TypeId::kDecimal && type_.scale != other.type_.scale) {
    const int scale = std::max(type_.scale, other.type_.scale);
    const __int128 a = static_cast<__int128>(AsInt()) * decimals::Pow10(scale - type_.scale);
    const __int128 b = static_cast<__int128>(other.AsInt()) * decimals::Pow10(scale - other.type_.scale);
    return ThreeWay(a, b);
  }
  if (data_.index() != other.data_.index()) {
    Fail(ErrorCode::kTypeMismatch, "cannot compare " + type_.ToString() + " with " + other.type_.ToString());
  }
  return std::visit(
      [&](const auto& lhs) -> int {
        using T = std::decay_t<decltype(lhs)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return 0;
        } else {
          return ThreeWay(lhs, std::get<T>(other.data_));
        }
      },
      data_);
}

std::string Value::ToString() const {
  if (IsNull()) return "NULL";
  switch (type_.id) {
    case TypeId::kInt64:
      return std::to_string(AsInt());
    case TypeId::kFloat64: {
      std::ostringstream out;
      out.precision(17);
      out << AsDouble();
      return out.str();
    }
    case TypeId::kDecimal:
      return decimals::Format(AsInt(), type_.scale);
    case TypeId::kString:
      return AsString();
    case TypeId::kDate:
      return dates::Format(AsInt());
    case TypeId::kBool:
      return AsBool() ? "true" : "false";
    case TypeId::kNull:
      break;
  }
  return "NULL";
}

nlohmann::json Value::ToJson() const {
  nlohmann::json json;
  json["type"] = type_.ToString();
  if (IsNull()) {
    json["null"] = true;
    return json;
  }
  switch (type_.id) {
    case TypeId::kInt64:
    case TypeId::kDecimal:
    case TypeId::kDate:
      json["v"] = AsInt();
      break;
    case TypeId::kFloat64:
      json["v"] = AsDouble();
      break;
    case TypeId::kString:
      json["v"] = AsString();
      break;
    case TypeId::kBool:
      json["v"] = AsBool();
      break;
    case TypeId::kNull:
      break;
  }
  return json;
}

Value Value::FromJson(const nlohmann::json& json) {
  const auto type = DataType::Parse(json.at("type").get<std::string>());
  if (json.contains("null")) return Null(type);
  Value result;
  result.type_ = type;
  switch (type.id) {
    case TypeId::kInt64:
    case TypeId::kDecimal:
    case TypeId::kDate:
      result.data_ = json.at("v").get<int64_t>();
      break;
    case TypeId::kFloat64:
      result.data_ = json.at("v").get<double>();
      break;
    case TypeId::kString:
      result.data_ = json.at("v").get<std::string>();
      break;
    case TypeId::kBool:
      result.data_ = json.at("v").get<bool>();
      break;
    case TypeId::kNull:
      break;
  }
  return result;
}

}  // namespace skylite
