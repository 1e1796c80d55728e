#include "skylite/sql/expression.hpp"

#include <cmath>

#include "skylite/common/errors.hpp"

namespace skylite {

std::string_view ArithOpSymbol(ArithOp op) {
  switch (op) {
    case ArithOp::kAdd:
      return "+";
    case ArithOp::kSub:
      return "-";
    case ArithOp::kMul:
      return "*";
    case ArithOp::kDiv:
      return "/";
  }
  return "?";
}

std::string_view CompareOpSymbol(CompareOp op) {
  switch (op) {
    case CompareOp::kEq:
      return "=";
    case CompareOp::kNe:
      return "<>";
    case CompareOp::kLt:
      return "<";
    case CompareOp::kLe:
      return "<=";
    case CompareOp::kGt:
      return ">";
    case CompareOp::kGe:
      return ">=";
  }
  return "?";
}

CompareOp FlipCompare(CompareOp op) {
  switch (op) {
    case CompareOp::kLt:
      return CompareOp::kGt;
    case CompareOp::kLe:
      return CompareOp::kGe;
    case CompareOp::kGt:
      return CompareOp::kLt;
    case CompareOp::kGe:
      return CompareOp::kLe;
    default:
      return op;
  }
}

Expr Expr::Column(std::string name, DataType type, bool nullable) {
  Expr expr;
  expr.kind = ExprKind::kColumn;
  expr.column = std::move(name);
  expr.type = type;
  expr.nullable = nullable;
  return expr;
}

Expr Expr::Literal(Value value) {
  Expr expr;
  expr.kind = ExprKind::kLiteral;
  expr.type = value.Type();
  expr.nullable = value.IsNull();
  expr.literal = std::move(value);
  return expr;
}

Expr Expr::Arith(ArithOp op, Expr left, Expr right, DataType result) {
  Expr expr;
  expr.kind = ExprKind::kArith;
  expr.arith = op;
  expr.type = result;
  expr.nullable = left.nullable || right.nullable || op == ArithOp::kDiv;
  expr.children = {std::move(left), std::move(right)};
  return expr;
}

Expr Expr::Compare(CompareOp op, Expr left, Expr right) {
  Expr expr;
  expr.kind = ExprKind::kCompare;
  expr.compare = op;
  expr.type = DataType::Bool();
  expr.nullable = left.nullable || right.nullable;
  expr.children = {std::move(left), std::move(right)};
  return expr;
}

Expr Expr::And(Expr left, Expr right) {
  Expr expr;
  expr.kind = ExprKind::kAnd;
  expr.type = DataType::Bool();
  expr.nullable = left.nullable || right.nullable;
  expr.children = {std::move(left), std::move(right)};
  return expr;
}

Expr Expr::Or(Expr left, Expr right) {
  Expr expr = And(std::move(left), std::move(right));
  expr.kind = ExprKind::kOr;
  return expr;
}

Expr Expr::Not(Expr child) {
  Expr expr;
  expr.kind = ExprKind::kNot;
  expr.type = DataType::Bool();
  expr.nullable = child.nullable;
  expr.children = {std::move(child)};
  return expr;
}

Expr Expr::Negate(Expr child) {
  Expr expr;
  expr.kind = ExprKind::kNegate;
  expr.type = child.type;
  expr.nullable = child.nullable;
  expr.children = {std::move(child)};
  return expr;
}

Expr Expr::In(Expr value, std::vector<Expr> items, bool negated) {
  Expr expr;
  expr.kind = ExprKind::kIn;
  expr.type = DataType::Bool();
  expr.negated = negated;
  expr.nullable = value.nullable;
  for (const auto& item : items) expr.nullable = expr.nullable || item.nullable;
  expr.children.push_back(std::move(value));
  for (auto& item : items) expr.children.push_back(std::move(item));
  return expr;
}

Expr Expr::IsNull(Expr child, bool negated) {
  Expr expr;
  expr.kind = ExprKind::kIsNull;
  expr.type = DataType::Bool();
  expr.negated = negated;
  expr.children = {std::move(child)};
  return expr;
}

Expr Expr::Case(std::vector<Expr> children, bool has_else, DataType result) {
  Expr expr;
  expr.kind = ExprKind::kCase;
  expr.type = result;
  expr.has_else = has_else;
  expr.nullable = !has_else;
  for (size_t i = 0; i < children.size(); ++i) {
    const bool is_value = (i % 2 == 1) || (has_else && i + 1 == children.size());
    if (is_value) expr.nullable = expr.nullable || children[i].nullable;
  }
  expr.children = std::move(children);
  return expr;
}

Expr Expr::Cast(Expr child, DataType target) {
  Expr expr;
  expr.kind = ExprKind::kCast;
  expr.type = target;
  expr.nullable = child.nullable;
  expr.children = {std::move(child)};
  return expr;
}

bool Expr::IsConstant() const {
  if (kind == ExprKind::kColumn) return false;
  for (const auto& child : children) {
    if (!child.IsConstant()) return false;
  }
  return true;
}

void Expr::CollectColumns(std::set<std::string>& columns) const {
  if (kind == ExprKind::kColumn) columns.insert(column);
  for (const auto& child : children) child.CollectColumns(columns);
}

namespace {

std::string LiteralToString(const Value& value) {
  if (value.IsNull()) return "null:" + value.Type().ToString();
  switch (value.Type().id) {
    case TypeId::kString: {
      std::string out = "'";
      for (const char c : value.AsString()) {
        out += c;
        if (c == '\'') out += '\'';
      }
      return out + "'";
    }
    case TypeId::kDate:
      return "date '" + value.ToString() + "'";
    case TypeId::kDecimal:
      return value.ToString() + ":" + value.Type().ToString();
    case TypeId::kFloat64:
      return value.ToString() + ":float64";
    default:
      return value.ToString();
  }
}

}  // namespace

std::string Expr::ToString() const {
  switch (kind) {
    case ExprKind::kColumn:
      return column;
    case ExprKind::kLiteral:
      return LiteralToString(literal);
    case ExprKind::kArith:
      return "(" + children[0].ToString() + " " + std::string(ArithOpSymbol(arith)) + " " + children[1].ToString() +
             ")";
    case ExprKind::kCompare:
      return "(" + children[0].ToString() + " " + std::string(CompareOpSymbol(compare)) + " " +
             children[1].ToString() + ")";
    case ExprKind::kAnd:
      return "(" + children[0].ToString() + " and " + children[1].ToString() + ")";
    case ExprKind::kOr:
      return "(" + children[0].ToString() + " or " + children[1].ToString() + ")";
    case ExprKind::kNot:
      return "(not " + children[0].ToString() + ")";
    case ExprKind::kNegate:
      return "(- " + children[0].ToString() + ")";
    case ExprKind::kIn: {
      std::string out = "(" + children[0].ToString() + (negated ? " not in (" : " in (");
      for (size_t i = 1; i < children.size(); ++i) out += (i > 1 ? ", " : "") + children[i].ToString();
      return out + "))";
    }
    case ExprKind::kIsNull:
      return "(" + children[0].ToString() + (negated ? " is not null)" : " is null)");
    case ExprKind::kCase: {
      std::string out = "case";
      const size_t pairs = (children.size() - (has_else ? 1 : 0)) / 2;
      for (size_t i = 0; i < pairs; ++i) {
        out += " when " + children[2 * i].ToString() + " then " + children[2 * i + 1].ToString();
      }
      if (has_else) out += " else " + children.back().ToString();
      return out + " end";
    }
    case ExprKind::kCast:
      return "cast(" + children[0].ToString() + " as " + type.ToString() + ")";
  }
  return "";
}

bool Expr::operator==(const Expr& other) const {
  return kind == other.kind && type == other.type && nullable == other.nullable && column == other.column &&
         literal == other.literal && arith == other.arith && compare == other.compare && negated == other.negated &&
         has_else == other.has_else && children == other.children;
}

std::vector<Expr> SplitConjuncts(const Expr& predicate) {
  if (predicate.kind != ExprKind::kAnd) return {predicate};
  auto conjuncts = SplitConjuncts(predicate.children[0]);
  auto right = SplitConjuncts(predicate.children[1]);
  conjuncts.insert(conjuncts.end(), right.begin(), right.end());
  return conjuncts;
}

Expr MakeConjunction(std::vector<Expr> conjuncts) {
  if (conjuncts.empty()) return Expr::Literal(Value::Bool(true));
  Expr result = std::move(conjuncts[0]);
  for (size_t i = 1; i < conjuncts.size(); ++i) result = Expr::And(std::move(result), std::move(conjuncts[i]));
  return result;
}

namespace {

int DecimalScale(const DataType& type) { return type.id == TypeId::kDecimal ? type.scale : 0; }

double ToDouble(const Value& value) {
  if (value.Type().id == TypeId::kFloat64) return value.AsDouble();
  return static_cast<double>(value.AsInt()) / static_cast<double>(decimals::Pow10(DecimalScale(value.Type())));
}

Value MakeTyped(int64_t raw, const DataType& type) {
  switch (type.id) {
    case TypeId::kInt64:
      return Value::Int64(raw);
    case TypeId::kDecimal:
      return Value::Decimal(raw, type.precision, type.scale);
    case TypeId::kDate:
      return Value::Date(raw);
    default:
      Fail(ErrorCode::kInternal, "integer result for type " + type.ToString());
  }
}

}  // namespace

Value CastValue(const Value& value, const DataType& target) {
  if (value.IsNull()) return Value::Null(target);
  const auto& source = value.Type();
  if (source == target) return value;
  switch (target.id) {
    case TypeId::kFloat64:
      if (source.IsNumeric()) return Value::Float64(ToDouble(value));
      break;
    case TypeId::kDecimal:
      if (source.id == TypeId::kInt64 || source.id == TypeId::kDecimal) {
        return Value::Decimal(decimals::Rescale(value.AsInt(), DecimalScale(source), target.scale), target.precision,
                              target.scale);
      }
      break;
    case TypeId::kInt64:
      if (source.id == TypeId::kDecimal) return Value::Int64(decimals::Rescale(value.AsInt(), source.scale, 0));
      break;
    default:
      break;
  }
  Fail(ErrorCode::kTypeMismatch, "cannot cast " + source.ToString() + " to " + target.ToString());
}

Value ArithValues(ArithOp op, const Value& left, const Value& right, const DataType& result) {
  if (left.IsNull() || right.IsNull()) return Value::Null(result);
  if (result.id == TypeId::kFloat64) {
    const double a = ToDouble(left);
    const double b = ToDouble(right);
    switch (op) {
      case ArithOp::kAdd:
        return Value::Float64(a + b);
      case ArithOp::kSub:
        return Value::Float64(a - b);
      case ArithOp::kMul:
        return Value::Float64(a * b);
      case ArithOp::kDiv:
        if (b == 0.0) return Value::Null(result);
        return Value::Float64(a / b);
    }
  }
  int64_t a = left.AsInt();
  int64_t b = right.AsInt();
  if (result.id == TypeId::kDecimal && op != ArithOp::kMul) {
    a = decimals::Rescale(a, DecimalScale(left.Type()), result.scale);
    b = decimals::Rescale(b, DecimalScale(right.Type()), result.scale);
  }
  switch (op) {
    case ArithOp::kAdd:
      return MakeTyped(decimals::CheckedAdd(a, b), result);
    case ArithOp::kSub:
      if (b == INT64_MIN) Fail(ErrorCode::kInvalidArgument, "numeric overflow");
      return MakeTyped(decimals::CheckedAdd(a, -b), result);
    case ArithOp::kMul:
      return MakeTyped(decimals::CheckedMul(a, b), result);
    case ArithOp::kDiv:
      break;
  }
  Fail(ErrorCode::kInternal, "integer division must be typed float64");
}

int CompareNonNull(const Value& left, const Value& right) {
  const auto& a = left.Type();
  const auto& b = right.Type();
  if (a.IsNumeric() && b.IsNumeric()) {
    if (a.id == TypeId::kFloat64 || b.id == TypeId::kFloat64) {
      const double x = ToDouble(left);
      const double y = ToDouble(right);
      return x < y ? -1 : (x > y ? 1 : 0);
    }
    const int scale = std::max(DecimalScale(a), DecimalScale(b));
    const __int128 x = static_cast<__int128>(left.AsInt()) * decimals::Pow10(scale - DecimalScale(a));
    const __int128 y = static_cast<__int128>(right.AsInt()) * decimals::Pow10(scale - DecimalScale(b));
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  if (a.id != b.id) Fail(ErrorCode::kTypeMismatch, "cannot compare " + a.ToString() + " with " + b.ToString());
  switch (a.id) {
    case TypeId::kString: {
      const int c = left.AsString().compare(right.AsString());
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case TypeId::kDate: {
      const int64_t x = left.AsInt();
      const int64_t y = right.AsInt();
      return x < y ? -1 : (x > y ? 1 : 0);
    }
    case TypeId::kBool:
      return static_cast<int>(left.AsBool()) - static_cast<int>(right.AsBool());
    default:
      Fail(ErrorCode::kTypeMismatch, "cannot compare values of type " + a.ToString());
  }
}

Value CompareValues(CompareOp op, const Value& left, const Value& right) {
  if (left.IsNull() || right.IsNull()) return Value::Null(DataType::Bool());
  const int c = CompareNonNull(left, right);
  switch (op) {
    case CompareOp::kEq:
      return Value::Bool(c == 0);
    case CompareOp::kNe:
      return Value::Bool(c != 0);
    case CompareOp::kLt:
      return Value::Bool(c < 0);
    case CompareOp::kLe:
      return Value::Bool(c <= 0);
    case CompareOp::kGt:
      return Value::Bool(c > 0);
    case CompareOp::kGe:
      return Value::Bool(c >= 0);
  }
  return Value::Null(DataType::Bool());
}

Value EvaluateScalar(const Expr& expr, const ColumnLookup& lookup) {
  switch (expr.kind) {
    case ExprKind::kColumn:
      return lookup(expr.column);
    case ExprKind::kLiteral:
      return expr.literal;
    case ExprKind::kArith: {
      const Value left = EvaluateScalar(expr.children[0], lookup);
      const Value right = EvaluateScalar(expr.children[1], lookup);
      if (expr.type.id == TypeId::kDate) {
        // Date shifted by a number of days.
        if (left.IsNull() || right.IsNull()) return Value::Null(expr.type);
        const bool date_left = left.Type().id == TypeId::kDate;
        const int64_t days = date_left ? right.AsInt() : left.AsInt();
        const int64_t base = date_left ? left.AsInt() : right.AsInt();
        return Value::Date(expr.arith == ArithOp::kSub ? base - days : base + days);
      }
      return ArithValues(expr.arith, left, right, expr.type);
    }
    case ExprKind::kCompare:
      return CompareValues(expr.compare, EvaluateScalar(expr.children[0], lookup),
                           EvaluateScalar(expr.children[1], lookup));
    case ExprKind::kAnd:
    case ExprKind::kOr: {
      const bool is_and = expr.kind == ExprKind::kAnd;
      const Value left = EvaluateScalar(expr.children[0], lookup);
      if (!left.IsNull() && left.AsBool() != is_and) return Value::Bool(!is_and);
      const Value right = EvaluateScalar(expr.children[1], lookup);
      if (!right.IsNull() && right.AsBool() != is_and) return Value::Bool(!is_and);
      if (left.IsNull() || right.IsNull()) return Value::Null(DataType::Bool());
      return Value::Bool(is_and);
    }
    case ExprKind::kNot: {
      const Value child = EvaluateScalar(expr.children[0], lookup);
      return child.IsNull() ? child : Value::Bool(!child.AsBool());
    }
    case ExprKind::kNegate: {
      const Value child = EvaluateScalar(expr.children[0], lookup);
      if (child.IsNull()) return child;
      if (child.Type().id == TypeId::kFloat64) return Value::Float64(-child.AsDouble());
      if (child.AsInt() == INT64_MIN) Fail(ErrorCode::kInvalidArgument, "numeric overflow");
      return MakeTyped(-child.AsInt(), child.Type());
    }
    case ExprKind::kIn: {
      const Value probe = EvaluateScalar(expr.children[0], lookup);
      if (probe.IsNull()) return Value::Null(DataType::Bool());
      bool saw_null = false;
      for (size_t i = 1; i < expr.children.size(); ++i) {
        const Value item = EvaluateScalar(expr.children[i], lookup);
        if (item.IsNull()) {
          saw_null = true;
        } else if (CompareNonNull(probe, item) == 0) {
          return Value::Bool(!expr.negated);
        }
      }
      if (saw_null) return Value::Null(DataType::Bool());
      return Value::Bool(expr.negated);
    }
    case ExprKind::kIsNull:
      return Value::Bool(EvaluateScalar(expr.children[0], lookup).IsNull() != expr.negated);
    case ExprKind::kCase: {
      const size_t pairs = (expr.children.size() - (expr.has_else ? 1 : 0)) / 2;
      for (size_t i = 0; i < pairs; ++i) {
        const Value condition = EvaluateScalar(expr.children[2 * i], lookup);
        if (!condition.IsNull() && condition.AsBool()) {
          return CastValue(EvaluateScalar(expr.children[2 * i + 1], lookup), expr.type);
        }
      }
      if (expr.has_else) return CastValue(EvaluateScalar(expr.children.back(), lookup), expr.type);
      return Value::Null(expr.type);
    }
    case ExprKind::kCast:
      return CastValue(EvaluateScalar(expr.children[0], lookup), expr.type);
  }
  Fail(ErrorCode::kInternal, "unknown expression kind");
}

}  // namespace skylite
