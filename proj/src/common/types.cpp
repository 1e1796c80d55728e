#include "skylite/common/types.hpp"

#include <charconv>
#include <cstdio>

#include "skylite/common/errors.hpp"

namespace skylite {

DataType DataType::Decimal(uint8_t precision, uint8_t scale) {
  if (precision == 0 || precision > kMaxDecimalPrecision || scale > precision) {
    Fail(ErrorCode::kInvalidArgument,
         "invalid decimal(" + std::to_string(precision) + "," + std::to_string(scale) + ")");
  }
  return {TypeId::kDecimal, precision, scale};
}

std::string DataType::ToString() const {
  switch (id) {
    case TypeId::kNull:
      return "null";
    case TypeId::kInt64:
      return "int64";
    case TypeId::kFloat64:
      return "float64";
    case TypeId::kDecimal:
      return "decimal(" + std::to_string(precision) + "," + std::to_string(scale) + ")";
    case TypeId::kString:
      return "string";
    case TypeId::kDate:
      return "date";
    case TypeId::kBool:
      return "bool";
  }
  return "unknown";
}

DataType DataType::Parse(std::string_view text) {
  if (text == "null") return Null();
  if (text == "int64") return Int64();
  if (text == "float64") return Float64();
  if (text == "string") return String();
  if (text == "date") return Date();
  if (text == "bool") return Bool();
  if (text.starts_with("decimal(") && text.ends_with(")")) {
    const auto inner = text.substr(8, text.size() - 9);
    const auto comma = inner.find(',');
    if (comma != std::string_view::npos) {
      int precision = 0;
      int scale = 0;
      const auto p = std::from_chars(inner.data(), inner.data() + comma, precision);
      const auto s = std::from_chars(inner.data() + comma + 1, inner.data() + inner.size(), scale);
      if (p.ec == std::errc() && s.ec == std::errc() && precision > 0 && scale >= 0) {
        return Decimal(static_cast<uint8_t>(precision), static_cast<uint8_t>(scale));
      }
    }
  }
  Fail(ErrorCode::kInvalidArgument, "unknown type '" + std::string(text) + "'");
}

Schema::Schema(std::vector<Field> fields) : fields_(std::move(fields)) {}

int Schema::IndexOf(std::string_view name) const {
  for (size_t i = 0; i < fields_.size(); ++i) {
    if (fields_[i].name == name) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

size_t Schema::IndexOrFail(std::string_view name) const {
  const int index = IndexOf(name);
  if (index < 0) {
    Fail(ErrorCode::kUnknownColumn, "column '" + std::string(name) + "' not in " + ToString());
  }
  return static_cast<size_t>(index);
}

void Schema::Append(Field field) { fields_.push_back(std::move(field)); }

Schema Schema::Select(const std::vector<size_t>& indices) const {
  std::vector<Field> fields;
  fields.reserve(indices.size());
  for (const auto index : indices) {
    fields.push_back(fields_.at(index));
  }
  return Schema(std::move(fields));
}

std::string Schema::ToString() const {
  std::string result = "(";
  for (size_t i = 0; i < fields_.size(); ++i) {
    if (i > 0) result += ", ";
    result += fields_[i].name + " " + fields_[i].type.ToString();
    if (fields_[i].nullable) result += " null";
  }
  return result + ")";
}

namespace dates {

// Howard Hinnant's civil calendar algorithms.
int64_t DaysFromCivil(int64_t year, unsigned month, unsigned day) {
  year -= month <= 2;
  const int64_t era = (year >= 0 ? year : year - 399) / 400;
  const auto yoe = static_cast<unsigned>(year - era * 400);
  const unsigned doy = (153 * (month > 2 ? month - 3 : month + 9) + 2) / 5 + day - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

void CivilFromDays(int64_t days, int64_t& year, unsigned& month, unsigned& day) {
  days += 719468;
  const int64_t era = (days >= 0 ? days : days - 146096) / 146097;
  const auto doe = static_cast<unsigned>(days - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  day = doy - (153 * mp + 2) / 5 + 1;
  month = mp < 10 ? mp + 3 : mp - 9;
  year = static_cast<int64_t>(yoe) + era * 400 + (month <= 2);
}

namespace {

bool IsLeap(int64_t year) { return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0; }

unsigned DaysInMonth(int64_t year, unsigned month) {
  static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return month == 2 && IsLeap(year) ? 29 : kDays[month - 1];
}

}  // namespace

int64_t Parse(std::string_view text) {
  int year = 0;
  unsigned month = 0;
  unsigned day = 0;
  const auto fail = [&]() { Fail(ErrorCode::kInvalidArgument, "invalid date '" + std::string(text) + "'"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') fail();
  if (std::from_chars(text.data(), text.data() + 4, year).ec != std::errc() ||
      std::from_chars(text.data() + 5, text.data() + 7, month).ec != std::errc() ||
      std::from_chars(text.data() + 8, text.data() + 10, day).ec != std::errc()) {
    fail();
  }
  if (month < 1 || month > 12 || day < 1 || day > DaysInMonth(year, month)) fail();
  return DaysFromCivil(year, month, day);
}

std::string Format(int64_t days) {
  int64_t year = 0;
  unsigned month = 0;
  unsigned day = 0;
  CivilFromDays(days, year, month, day);
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%04lld-%02u-%02u", static_cast<long long>(year), month, day);
  return buffer;
}

int64_t AddMonths(int64_t days, int64_t months) {
  int64_t year = 0;
  unsigned month = 0;
  unsigned day = 0;
  CivilFromDays(days, year, month, day);
  int64_t total = year * 12 + (month - 1) + months;
  const int64_t new_year = total >= 0 ? total / 12 : (total - 11) / 12;
  const auto new_month = static_cast<unsigned>(total - new_year * 12 + 1);
  const unsigned new_day = std::min(day, DaysInMonth(new_year, new_month));
  return DaysFromCivil(new_year, new_month, new_day);
}

}  // namespace dates

namespace decimals {

int64_t Pow10(int exponent) {
  Assert(exponent >= 0 && exponent <= 18, "decimal exponent out of range");
  int64_t result = 1;
  for (int i = 0; i < exponent; ++i) result *= 10;
  return result;
}

int64_t CheckedAdd(int64_t a, int64_t b) {
  int64_t result = 0;
  if (__builtin_add_overflow(a, b, &result)) {
    Fail(ErrorCode::kInvalidArgument, "decimal overflow in addition");
  }
  return result;
}

int64_t CheckedMul(int64_t a, int64_t b) {
  int64_t result = 0;
  if (__builtin_mul_overflow(a, b, &result)) {
    Fail(ErrorCode::kInvalidArgument, "decimal overflow in multiplication");
  }
  return result;
}

int64_t DivideRoundHalfEven(__int128 numerator, __int128 denominator) {
  Assert(denominator != 0, "division by zero");
  if (denominator < 0) {
    numerator = -numerator;
    denominator = -denominator;
  }
  __int128 quotient = numerator / denominator;
  __int128 remainder = numerator % denominator;
  if (remainder < 0) {
    // Floor division.
    quotient -= 1;
    remainder += denominator;
  }
  const __int128 twice = remainder * 2;
  if (twice > denominator || (twice == denominator && (quotient % 2 != 0))) {
    quotient += 1;
  }
  if (quotient > INT64_MAX || quotient < INT64_MIN) {
    Fail(ErrorCode::kInvalidArgument, "decimal overflow in division");
  }
  return static_cast<int64_t>(quotient);
}

int64_t Rescale(int64_t value, int from_scale, int to_scale) {
  if (to_scale == from_scale) return value;
  if (to_scale > from_scale) return CheckedMul(value, Pow10(to_scale - from_scale));
  return DivideRoundHalfEven(value, Pow10(from_scale - to_scale));
}

std::string Format(int64_t value, int scale) {
  const bool negative = value < 0;
  const auto magnitude = static_cast<unsigned __int128>(negative ? -static_cast<__int128>(value) : value);
  std::string digits;
  auto rest = magnitude;
  do {
    digits.insert(digits.begin(), static_cast<char>('0' + static_cast<int>(rest % 10)));
    rest /= 10;
  } while (rest != 0);
  if (scale > 0) {
    while (digits.size() <= static_cast<size_t>(scale)) digits.insert(digits.begin(), '0');
    digits.insert(digits.end() - scale, '.');
  }
  return negative ? "-" + digits : digits;
}

bool ParseLiteral(std::string_view text, int64_t& value, int& scale) {
  value = 0;
  scale = 0;
  bool seen_dot = false;
  bool seen_digit = false;
  for (const char c : text) {
    if (c == '.') {
      if (seen_dot) return false;
      seen_dot = true;
      continue;
    }
    if (c < '0' || c > '9') return false;
    seen_digit = true;
    if (__builtin_mul_overflow(value, 10, &value) || __builtin_add_overflow(value, c - '0', &value)) return false;
    if (seen_dot) ++scale;
  }
  return seen_digit && scale <= kMaxDecimalPrecision;
}

}  // namespace decimals

}  // namespace skylite
