#include "skylite/execution/expression_evaluator.hpp"

#include "skylite/common/errors.hpp"

namespace skylite {

namespace {

int ScaleOf(const DataType& type) { return type.id == TypeId::kDecimal ? type.scale : 0; }

double NumberAt(const Column& column, size_t row) {
  if (column.Type().id == TypeId::kFloat64) return column.Float(row);
  return static_cast<double>(column.Int(row)) / static_cast<double>(decimals::Pow10(ScaleOf(column.Type())));
}

Column NullColumn(const DataType& type, size_t rows) {
  Column column(type);
  column.Reserve(rows);
  for (size_t i = 0; i < rows; ++i) column.AppendNull();
  return column;
}

Column Broadcast(const Expr& expr, size_t rows) {
  Column column(expr.type);
  column.Reserve(rows);
  if (expr.literal.IsNull()) return NullColumn(expr.type, rows);
  for (size_t i = 0; i < rows; ++i) column.Append(expr.literal);
  return column;
}

Column CastColumn(const Column& input, const DataType& target) {
  const auto& source = input.Type();
  if (source == target) return input;
  const size_t rows = input.Size();
  if (source.id == TypeId::kNull) return NullColumn(target, rows);
  Column output(target);
  output.Reserve(rows);
  const bool to_float = target.id == TypeId::kFloat64 && source.IsNumeric();
  const bool to_decimal = target.id == TypeId::kDecimal && (source.id == TypeId::kInt64 || source.id == TypeId::kDecimal);
  const bool to_int = target.id == TypeId::kInt64 && source.id == TypeId::kDecimal;
  if (!to_float && !to_decimal && !to_int) {
    Fail(ErrorCode::kTypeMismatch, "cannot cast " + source.ToString() + " to " + target.ToString());
  }
  for (size_t row = 0; row < rows; ++row) {
    if (input.IsNull(row)) {
      output.AppendNull();
    } else if (to_float) {
      output.AppendFloat(NumberAt(input, row));
    } else {
      output.AppendInt(decimals::Rescale(input.Int(row), ScaleOf(source), ScaleOf(target)));
    }
  }
  return output;
}

Column EvaluateArith(const Expr& expr, const Column& left, const Column& right) {
  const size_t rows = left.Size();
  Column output(expr.type);
  output.Reserve(rows);
  const auto& result = expr.type;
  if (result.id == TypeId::kFloat64) {
    for (size_t row = 0; row < rows; ++row) {
      if (left.IsNull(row) || right.IsNull(row)) {
        output.AppendNull();
        continue;
      }
      const double a = NumberAt(left, row);
      const double b = NumberAt(right, row);
      switch (expr.arith) {
        case ArithOp::kAdd:
          output.AppendFloat(a + b);
          break;
        case ArithOp::kSub:
          output.AppendFloat(a - b);
          break;
        case ArithOp::kMul:
          output.AppendFloat(a * b);
          break;
        case ArithOp::kDiv:
          if (b == 0.0) {
            output.AppendNull();
          } else {
            output.AppendFloat(a / b);
          }
          break;
      }
    }
    return output;
  }
  if (expr.arith == ArithOp::kDiv) Fail(ErrorCode::kInternal, "integer division must be typed float64");
  if (result.id == TypeId::kDate) {
    const bool date_left = left.Type().id == TypeId::kDate;
    const Column& dates = date_left ? left : right;
    const Column& days = date_left ? right : left;
    for (size_t row = 0; row < rows; ++row) {
      if (left.IsNull(row) || right.IsNull(row)) {
        output.AppendNull();
      } else {
        output.AppendInt(expr.arith == ArithOp::kSub ? dates.Int(row) - days.Int(row) : dates.Int(row) + days.Int(row));
      }
    }
    return output;
  }
  // int64 or decimal: add/sub align both sides to the result scale; mul adds the operand scales.
  int64_t left_factor = 1;
  int64_t right_factor = 1;
  if (expr.arith != ArithOp::kMul && result.id == TypeId::kDecimal) {
    left_factor = decimals::Pow10(result.scale - ScaleOf(left.Type()));
    right_factor = decimals::Pow10(result.scale - ScaleOf(right.Type()));
  }
  for (size_t row = 0; row < rows; ++row) {
    if (left.IsNull(row) || right.IsNull(row)) {
      output.AppendNull();
      continue;
    }
    int64_t a = left.Int(row);
    int64_t b = right.Int(row);
    if (left_factor != 1) a = decimals::CheckedMul(a, left_factor);
    if (right_factor != 1) b = decimals::CheckedMul(b, right_factor);
    switch (expr.arith) {
      case ArithOp::kAdd:
        output.AppendInt(decimals::CheckedAdd(a, b));
        break;
      case ArithOp::kSub:
        if (b == INT64_MIN) Fail(ErrorCode::kInvalidArgument, "numeric overflow");
        output.AppendInt(decimals::CheckedAdd(a, -b));
        break;
      case ArithOp::kMul:
        output.AppendInt(decimals::CheckedMul(a, b));
        break;
      case ArithOp::kDiv:
        break;
    }
  }
  return output;
}

bool Holds(CompareOp op, int c) {
  switch (op) {
    case CompareOp::kEq:
      return c == 0;
    case CompareOp::kNe:
      return c != 0;
    case CompareOp::kLt:
      return c < 0;
    case CompareOp::kLe:
      return c <= 0;
    case CompareOp::kGt:
      return c > 0;
    case CompareOp::kGe:
      return c >= 0;
  }
  return false;
}

Column EvaluateCompare(CompareOp op, const Column& left, const Column& right) {
  const size_t rows = left.Size();
  Column output(DataType::Bool());
  output.Reserve(rows);
  const auto& a = left.Type();
  const auto& b = right.Type();
  // Fast path: same integer-backed representation and scale.
  const bool same_ints = a.IsIntegerBacked() && b.IsIntegerBacked() && ScaleOf(a) == ScaleOf(b) &&
                         (a.id == TypeId::kDate) == (b.id == TypeId::kDate);
  for (size_t row = 0; row < rows; ++row) {
    if (left.IsNull(row) || right.IsNull(row)) {
      output.AppendNull();
    } else if (same_ints) {
      const int64_t x = left.Int(row);
      const int64_t y = right.Int(row);
      output.AppendBool(Holds(op, x < y ? -1 : (x > y ? 1 : 0)));
    } else {
      output.AppendBool(Holds(op, CompareCells(left, row, right, row)));
    }
  }
  return output;
}

Column EvaluateLogical(bool is_and, const Column& left, const Column& right) {
  const size_t rows = left.Size();
  Column output(DataType::Bool());
  output.Reserve(rows);
  for (size_t row = 0; row < rows; ++row) {
    const bool left_null = left.IsNull(row);
    const bool right_null = right.IsNull(row);
    // A decisive operand (false for and, true for or) wins over null.
    if ((!left_null && left.Bool(row) != is_and) || (!right_null && right.Bool(row) != is_and)) {
      output.AppendBool(!is_and);
    } else if (left_null || right_null) {
      output.AppendNull();
    } else {
      output.AppendBool(is_and);
    }
  }
  return output;
}

Column EvaluateIn(const Expr& expr, const RecordBatch& batch) {
  const Column probe = EvaluateExpr(expr.children[0], batch);
  std::vector<Column> items;
  for (size_t i = 1; i < expr.children.size(); ++i) items.push_back(EvaluateExpr(expr.children[i], batch));
  const size_t rows = probe.Size();
  Column output(DataType::Bool());
  output.Reserve(rows);
  for (size_t row = 0; row < rows; ++row) {
    if (probe.IsNull(row)) {
      output.AppendNull();
      continue;
    }
    bool found = false;
    bool saw_null = false;
    for (const auto& item : items) {
      if (item.IsNull(row)) {
        saw_null = true;
      } else if (CompareCells(probe, row, item, row) == 0) {
        found = true;
        break;
      }
    }
    if (found) {
      output.AppendBool(!expr.negated);
    } else if (saw_null) {
      output.AppendNull();
    } else {
      output.AppendBool(expr.negated);
    }
  }
  return output;
}

Column EvaluateCase(const Expr& expr, const RecordBatch& batch) {
  const size_t rows = batch.NumRows();
  const size_t pairs = (expr.children.size() - (expr.has_else ? 1 : 0)) / 2;
  std::vector<Column> conditions;
  std::vector<Column> values;
  for (size_t i = 0; i < pairs; ++i) {
    conditions.push_back(EvaluateExpr(expr.children[2 * i], batch));
    values.push_back(CastColumn(EvaluateExpr(expr.children[2 * i + 1], batch), expr.type));
  }
  std::optional<Column> otherwise;
  if (expr.has_else) otherwise = CastColumn(EvaluateExpr(expr.children.back(), batch), expr.type);
  Column output(expr.type);
  output.Reserve(rows);
  for (size_t row = 0; row < rows; ++row) {
    bool matched = false;
    for (size_t i = 0; i < pairs && !matched; ++i) {
      if (!conditions[i].IsNull(row) && conditions[i].Bool(row)) {
        output.AppendFrom(values[i], row);
        matched = true;
      }
    }
    if (matched) continue;
    if (otherwise) {
      output.AppendFrom(*otherwise, row);
    } else {
      output.AppendNull();
    }
  }
  return output;
}

}  // namespace

int CompareCells(const Column& left, size_t left_row, const Column& right, size_t right_row) {
  const auto& a = left.Type();
  const auto& b = right.Type();
  if (a.IsNumeric() && b.IsNumeric()) {
    if (a.id == TypeId::kFloat64 || b.id == TypeId::kFloat64) {
      const double x = NumberAt(left, left_row);
      const double y = NumberAt(right, right_row);
      return x < y ? -1 : (x > y ? 1 : 0);
    }
    const int scale = std::max(ScaleOf(a), ScaleOf(b));
    const __int128 x = static_cast<__int128>(left.Int(left_row)) * decimals::Pow10(scale - ScaleOf(a));
    const __int128 y = static_cast<__int128>(right.Int(right_row)) * decimals::Pow10(scale - ScaleOf(b));
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  if (a.id != b.id) Fail(ErrorCode::kTypeMismatch, "cannot compare " + a.ToString() + " with " + b.ToString());
  switch (a.id) {
    case TypeId::kString: {
      const int c = left.Str(left_row).compare(right.Str(right_row));
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case TypeId::kDate: {
      const int64_t x = left.Int(left_row);
      const int64_t y = right.Int(right_row);
      return x < y ? -1 : (x > y ? 1 : 0);
    }
    case TypeId::kBool:
      return static_cast<int>(left.Bool(left_row)) - static_cast<int>(right.Bool(right_row));
    default:
      Fail(ErrorCode::kTypeMismatch, "cannot compare values of type " + a.ToString());
  }
}

Column EvaluateExpr(const Expr& expr, const RecordBatch& batch) {
  const size_t rows = batch.NumRows();
  switch (expr.kind) {
    case ExprKind::kColumn:
      return batch.column(batch.GetSchema().IndexOrFail(expr.column));
    case ExprKind::kLiteral:
      return Broadcast(expr, rows);
    case ExprKind::kArith:
      return EvaluateArith(expr, EvaluateExpr(expr.children[0], batch), EvaluateExpr(expr.children[1], batch));
    case ExprKind::kCompare:
      return EvaluateCompare(expr.compare, EvaluateExpr(expr.children[0], batch), EvaluateExpr(expr.children[1], batch));
    case ExprKind::kAnd:
    case ExprKind::kOr:
      return EvaluateLogical(expr.kind == ExprKind::kAnd, EvaluateExpr(expr.children[0], batch),
                             EvaluateExpr(expr.children[1], batch));
    case ExprKind::kNot: {
      const Column child = EvaluateExpr(expr.children[0], batch);
      Column output(DataType::Bool());
      output.Reserve(rows);
      for (size_t row = 0; row < rows; ++row) {
        if (child.IsNull(row)) {
          output.AppendNull();
        } else {
          output.AppendBool(!child.Bool(row));
        }
      }
      return output;
    }
    case ExprKind::kNegate: {
      const Column child = EvaluateExpr(expr.children[0], batch);
      Column output(child.Type());
      output.Reserve(rows);
      for (size_t row = 0; row < rows; ++row) {
        if (child.IsNull(row)) {
          output.AppendNull();
        } else if (child.Type().id == TypeId::kFloat64) {
          output.AppendFloat(-child.Float(row));
        } else {
          if (child.Int(row) == INT64_MIN) Fail(ErrorCode::kInvalidArgument, "numeric overflow");
          output.AppendInt(-child.Int(row));
        }
      }
      return output;
    }
    case ExprKind::kIn:
      return EvaluateIn(expr, batch);
    case ExprKind::kIsNull: {
      const Column child = EvaluateExpr(expr.children[0], batch);
      Column output(DataType::Bool());
      output.Reserve(rows);
      for (size_t row = 0; row < rows; ++row) output.AppendBool(child.IsNull(row) != expr.negated);
      return output;
    }
    case ExprKind::kCase:
      return EvaluateCase(expr, batch);
    case ExprKind::kCast:
      return CastColumn(EvaluateExpr(expr.children[0], batch), expr.type);
  }
  Fail(ErrorCode::kInternal, "unknown expression kind");
}

std::vector<uint32_t> EvaluateFilter(const Expr& predicate, const RecordBatch& batch) {
  const Column mask = EvaluateExpr(predicate, batch);
  std::vector<uint32_t> selected;
  selected.reserve(mask.Size());
  for (size_t row = 0; row < mask.Size(); ++row) {
    if (!mask.IsNull(row) && mask.Bool(row)) selected.push_back(static_cast<uint32_t>(row));
  }
  return selected;
}

}  // namespace skylite
