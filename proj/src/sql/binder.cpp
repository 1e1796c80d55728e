#include "skylite/sql/binder.hpp"

#include <map>
#include <set>

#include "skylite/common/errors.hpp"
#include "skylite/sql/parser.hpp"

namespace skylite {

namespace {

bool IsAggregateName(const std::string& name) {
  return name == "sum" || name == "avg" || name == "count" || name == "min" || name == "max";
}

bool ContainsAggregate(const AstExpr& ast) {
  if (ast.kind == AstKind::kCall && IsAggregateName(ast.name)) return true;
  for (const auto& child : ast.children) {
    if (ContainsAggregate(child)) return true;
  }
  return false;
}

struct Scope {
  Schema schema;
  // Qualifier (alias or table name) -> its columns.
  std::map<std::string, std::set<std::string>> qualifiers;
};

// Common type for comparison and case branches.
DataType CommonType(const DataType& a, const DataType& b) {
  if (a.id == TypeId::kNull) return b;
  if (b.id == TypeId::kNull) return a;
  if (a.IsNumeric() && b.IsNumeric()) {
    if (a.id == TypeId::kFloat64 || b.id == TypeId::kFloat64) return DataType::Float64();
    if (a.id == TypeId::kDecimal || b.id == TypeId::kDecimal) {
      const uint8_t scale = std::max(a.id == TypeId::kDecimal ? a.scale : 0, b.id == TypeId::kDecimal ? b.scale : 0);
      return DataType::Decimal(kMaxDecimalPrecision, scale);
    }
    return DataType::Int64();
  }
  if (a.id == b.id) return a;
  Fail(ErrorCode::kTypeMismatch, "incompatible types " + a.ToString() + " and " + b.ToString());
}

// Inserts a cast when the type family differs; decimals of another scale compare without one.
Expr CoerceFamily(Expr expr, const DataType& target) {
  if (expr.type.id == target.id) return expr;
  return Expr::Cast(std::move(expr), target);
}

Expr CoerceExact(Expr expr, const DataType& target) {
  if (expr.type == target) return expr;
  return Expr::Cast(std::move(expr), target);
}

Expr BindLiteral(const AstExpr& ast) {
  switch (ast.literal_kind) {
    case LiteralKind::kInteger: {
      int64_t value = 0;
      int scale = 0;
      if (!decimals::ParseLiteral(ast.text, value, scale)) {
        Fail(ErrorCode::kInvalidArgument, "integer literal out of range: " + ast.text);
      }
      return Expr::Literal(Value::Int64(value));
    }
    case LiteralKind::kDecimal: {
      int64_t value = 0;
      int scale = 0;
      if (!decimals::ParseLiteral(ast.text, value, scale) || scale > kMaxDecimalPrecision) {
        Fail(ErrorCode::kInvalidArgument, "decimal literal out of range: " + ast.text);
      }
      int digits = 0;
      for (int64_t rest = value < 0 ? -value : value; rest > 0; rest /= 10) ++digits;
      const uint8_t precision = static_cast<uint8_t>(std::clamp(std::max(digits, scale), 1, 18));
      return Expr::Literal(Value::Decimal(value, precision, static_cast<uint8_t>(scale)));
    }
    case LiteralKind::kString:
      return Expr::Literal(Value::String(ast.text));
    case LiteralKind::kDate:
      return Expr::Literal(Value::Date(dates::Parse(ast.text)));
    case LiteralKind::kNull:
      return Expr::Literal(Value::Null());
    case LiteralKind::kBool:
      return Expr::Literal(Value::Bool(ast.text == "true"));
  }
  Fail(ErrorCode::kInternal, "unknown literal kind");
}

Expr RequireBool(Expr expr, const std::string& context) {
  if (expr.type.id == TypeId::kBool) return expr;
  if (expr.type.id == TypeId::kNull) return Expr::Cast(std::move(expr), DataType::Bool());
  Fail(ErrorCode::kTypeMismatch, context + " requires a boolean operand, got " + expr.type.ToString());
}

Expr BindComparison(CompareOp op, Expr left, Expr right) {
  const DataType common = CommonType(left.type, right.type);
  return Expr::Compare(op, CoerceFamily(std::move(left), common), CoerceFamily(std::move(right), common));
}

Expr BindArithmetic(ArithOp op, Expr left, Expr right) {
  auto a = left.type;
  auto b = right.type;
  if (a.id == TypeId::kNull) a = b.id == TypeId::kNull ? DataType::Int64() : b;
  if (b.id == TypeId::kNull) b = a;
  if (a.id == TypeId::kDate || b.id == TypeId::kDate) {
    const bool date_plus_days = (op == ArithOp::kAdd || op == ArithOp::kSub) && a.id == TypeId::kDate &&
                                b.id == TypeId::kInt64;
    const bool days_plus_date = op == ArithOp::kAdd && a.id == TypeId::kInt64 && b.id == TypeId::kDate;
    if (!date_plus_days && !days_plus_date) {
      Fail(ErrorCode::kTypeMismatch, "unsupported date arithmetic " + a.ToString() + " " +
                                         std::string(ArithOpSymbol(op)) + " " + b.ToString());
    }
    return Expr::Arith(op, CoerceExact(std::move(left), a), CoerceExact(std::move(right), b), DataType::Date());
  }
  if (!a.IsNumeric() || !b.IsNumeric()) {
    Fail(ErrorCode::kTypeMismatch, "arithmetic on " + a.ToString() + " and " + b.ToString());
  }
  if (op == ArithOp::kDiv || a.id == TypeId::kFloat64 || b.id == TypeId::kFloat64) {
    return Expr::Arith(op, CoerceExact(std::move(left), DataType::Float64()),
                       CoerceExact(std::move(right), DataType::Float64()), DataType::Float64());
  }
  if (a.id == TypeId::kInt64 && b.id == TypeId::kInt64) {
    return Expr::Arith(op, CoerceExact(std::move(left), a), CoerceExact(std::move(right), b), DataType::Int64());
  }
  const DataType da = a.id == TypeId::kDecimal ? a : DataType::Decimal(kMaxDecimalPrecision, 0);
  const DataType db = b.id == TypeId::kDecimal ? b : DataType::Decimal(kMaxDecimalPrecision, 0);
  const int scale = op == ArithOp::kMul ? da.scale + db.scale : std::max(da.scale, db.scale);
  if (scale > kMaxDecimalPrecision) {
    Fail(ErrorCode::kNotSupported, "decimal product scale " + std::to_string(scale) + " exceeds 18");
  }
  return Expr::Arith(op, CoerceExact(std::move(left), da), CoerceExact(std::move(right), db),
                     DataType::Decimal(kMaxDecimalPrecision, static_cast<uint8_t>(scale)));
}

class Binder {
 public:
  explicit Binder(const Catalog& catalog) : catalog_(catalog) {}

  LogicalPlan BindStatement(const SelectStatement& statement) {
    LogicalPlan plan = BindFrom(statement);
    Scope input = scope_;

    std::vector<Expr> conjuncts;
    for (const auto& item : statement.from) {
      if (item.join_condition) {
        RejectAggregates(*item.join_condition, "join condition");
        conjuncts.push_back(RequireBool(BindExpr(*item.join_condition), "join condition"));
      }
    }
    if (statement.where) {
      RejectAggregates(*statement.where, "where clause");
      conjuncts.push_back(RequireBool(BindExpr(*statement.where), "where clause"));
    }
    if (!conjuncts.empty()) plan = LogicalPlan::Filter(std::move(plan), MakeConjunction(std::move(conjuncts)));

    bool aggregating = !statement.group_by.empty();
    for (const auto& item : statement.select) aggregating = aggregating || (!item.star && ContainsAggregate(item.expr));
    for (const auto& item : statement.order_by) aggregating = aggregating || ContainsAggregate(item.expr);

    if (aggregating) {
      for (size_t i = 0; i < statement.group_by.size(); ++i) {
        const auto& ast = statement.group_by[i];
        RejectAggregates(ast, "group by");
        Expr key = BindExpr(ast);
        bool duplicate = false;
        for (const auto& existing : keys_) duplicate = duplicate || existing.expr == key;
        if (duplicate) continue;
        std::string name = key.kind == ExprKind::kColumn ? key.column : "#key" + std::to_string(i);
        keys_.push_back({std::move(key), std::move(name)});
      }
    }

    // Select list.
    std::vector<NamedExpr> projections;
    std::set<std::string> used_names;
    for (const auto& item : statement.select) {
      if (item.star) {
        if (aggregating) Fail(ErrorCode::kUngroupedColumn, "select * with aggregation");
        for (const auto& field : input.schema.Fields()) {
          projections.push_back({Expr::Column(field.name, field.type, field.nullable), UniqueName(field.name, used_names)});
        }
        continue;
      }
      std::string name = item.alias;
      if (name.empty()) name = item.expr.kind == AstKind::kColumn ? item.expr.name : ToSql(item.expr);
      name = UniqueName(name, used_names);
      Expr expr = aggregating ? BindAggregated(item.expr, name) : BindExpr(item.expr);
      projections.push_back({std::move(expr), std::move(name)});
    }

    // Order by: output columns when possible, otherwise expressions below the projection.
    std::vector<SortKey> above;
    std::vector<SortKey> below;
    bool all_above = true;
    for (const auto& item : statement.order_by) {
      std::optional<size_t> output;
      if (item.expr.kind == AstKind::kColumn && item.expr.table.empty()) {
        for (size_t i = 0; i < projections.size(); ++i) {
          if (projections[i].name == item.expr.name) output = i;
        }
      }
      if (!output && item.expr.kind == AstKind::kLiteral && item.expr.literal_kind == LiteralKind::kInteger) {
        const auto position = std::stoll(item.expr.text);
        if (position < 1 || position > static_cast<int64_t>(projections.size())) {
          Fail(ErrorCode::kInvalidArgument, "order by position " + item.expr.text + " out of range");
        }
        output = static_cast<size_t>(position - 1);
      }
      if (!output) {
        size_t index = 0;
        for (const auto& select : statement.select) {
          if (!select.star && select.expr == item.expr && index < projections.size()) output = index;
          index += select.star ? input.schema.Size() : 1;
        }
      }
      if (output) {
        const auto& projection = projections[*output];
        above.push_back({Expr::Column(projection.name, projection.expr.type, projection.expr.nullable),
                         item.descending});
        below.push_back({projection.expr, item.descending});
      } else {
        all_above = false;
        Expr expr = aggregating ? BindAggregated(item.expr, "") : BindExpr(item.expr);
        above.push_back({expr, item.descending});
        below.push_back({std::move(expr), item.descending});
      }
    }

    if (aggregating) plan = LogicalPlan::Aggregate(std::move(plan), keys_, aggregates_);
    if (!statement.order_by.empty() && !all_above) plan = LogicalPlan::Sort(std::move(plan), std::move(below));
    if (!IsIdentity(projections, plan.schema)) plan = LogicalPlan::Project(std::move(plan), std::move(projections));
    if (!statement.order_by.empty() && all_above) plan = LogicalPlan::Sort(std::move(plan), std::move(above));
    if (statement.limit) plan = LogicalPlan::Limit(std::move(plan), *statement.limit);
    return plan;
  }

 private:
  static std::string UniqueName(const std::string& base, std::set<std::string>& used) {
    std::string name = base;
    for (int suffix = 2; used.count(name); ++suffix) name = base + "_" + std::to_string(suffix);
    used.insert(name);
    return name;
  }

  static bool IsIdentity(const std::vector<NamedExpr>& projections, const Schema& input) {
    if (projections.size() != input.Size()) return false;
    for (size_t i = 0; i < projections.size(); ++i) {
      const auto& projection = projections[i];
      if (projection.expr.kind != ExprKind::kColumn || projection.expr.column != input.At(i).name ||
          projection.name != input.At(i).name) {
        return false;
      }
    }
    return true;
  }

  static void RejectAggregates(const AstExpr& ast, const std::string& where) {
    if (ContainsAggregate(ast)) Fail(ErrorCode::kInvalidArgument, "aggregate functions are not allowed in " + where);
  }

  LogicalPlan BindFrom(const SelectStatement& statement) {
    if (statement.from.empty()) return LogicalPlan::OneRow();
    std::optional<LogicalPlan> plan;
    std::vector<Field> fields;
    for (const auto& item : statement.from) {
      const TableEntry& table = catalog_.Resolve(item.table.name);
      const std::string qualifier = item.table.alias.empty() ? item.table.name : item.table.alias;
      if (scope_.qualifiers.count(qualifier)) {
        Fail(ErrorCode::kNotSupported, "table name or alias '" + qualifier + "' used twice");
      }
      auto& columns = scope_.qualifiers[qualifier];
      std::vector<std::string> names;
      for (const auto& field : table.schema.Fields()) {
        if (scope_.schema.IndexOf(field.name) >= 0) {
          Fail(ErrorCode::kNotSupported, "column '" + field.name + "' appears in more than one joined table");
        }
        scope_.schema.Append(field);
        columns.insert(field.name);
        names.push_back(field.name);
      }
      LogicalPlan scan = LogicalPlan::Scan(table, std::move(names));
      plan = plan ? LogicalPlan::Join(std::move(*plan), std::move(scan), {}) : std::move(scan);
    }
    return std::move(*plan);
  }

  Expr ResolveColumn(const AstExpr& ast) const {
    if (!ast.table.empty()) {
      const auto it = scope_.qualifiers.find(ast.table);
      if (it == scope_.qualifiers.end()) {
        Fail(ErrorCode::kUnknownColumn, "unknown table qualifier '" + ast.table + "' in " + ToSql(ast));
      }
      if (!it->second.count(ast.name)) Fail(ErrorCode::kUnknownColumn, "unknown column '" + ToSql(ast) + "'");
    }
    const int index = scope_.schema.IndexOf(ast.name);
    if (index < 0) Fail(ErrorCode::kUnknownColumn, "unknown column '" + ast.name + "'");
    const auto& field = scope_.schema.At(static_cast<size_t>(index));
    return Expr::Column(field.name, field.type, field.nullable);
  }

  // Binds an expression over the input scope. In aggregated context, `hook` resolves group keys and aggregates.
  Expr BindExpr(const AstExpr& ast, const std::function<std::optional<Expr>(const AstExpr&)>* hook = nullptr) {
    if (hook) {
      if (auto resolved = (*hook)(ast)) return std::move(*resolved);
    }
    const auto bind = [&](const AstExpr& child) { return BindExpr(child, hook); };
    switch (ast.kind) {
      case AstKind::kColumn:
        return ResolveColumn(ast);
      case AstKind::kLiteral:
        return BindLiteral(ast);
      case AstKind::kUnary: {
        Expr child = bind(ast.children[0]);
        if (ast.op == "not") return Expr::Not(RequireBool(std::move(child), "not"));
        if (child.type.id == TypeId::kNull) child = Expr::Cast(std::move(child), DataType::Int64());
        if (!child.type.IsNumeric()) Fail(ErrorCode::kTypeMismatch, "negation of " + child.type.ToString());
        return Expr::Negate(std::move(child));
      }
      case AstKind::kBinary:
        return BindBinary(ast, hook);
      case AstKind::kBetween: {
        Expr value = bind(ast.children[0]);
        Expr low = bind(ast.children[1]);
        Expr high = bind(ast.children[2]);
        Expr range = Expr::And(BindComparison(CompareOp::kGe, value, std::move(low)),
                               BindComparison(CompareOp::kLe, value, std::move(high)));
        return ast.negated ? Expr::Not(std::move(range)) : range;
      }
      case AstKind::kIn: {
        Expr value = bind(ast.children[0]);
        std::vector<Expr> items;
        DataType common = value.type;
        for (size_t i = 1; i < ast.children.size(); ++i) {
          items.push_back(bind(ast.children[i]));
          common = CommonType(common, items.back().type);
        }
        for (auto& item : items) item = CoerceFamily(std::move(item), common);
        return Expr::In(CoerceFamily(std::move(value), common), std::move(items), ast.negated);
      }
      case AstKind::kIsNull:
        return Expr::IsNull(bind(ast.children[0]), ast.negated);
      case AstKind::kCase: {
        std::vector<Expr> children;
        DataType result = DataType::Null();
        for (size_t i = 0; i < ast.children.size(); ++i) {
          const bool is_value = (i % 2 == 1) || (ast.has_else && i + 1 == ast.children.size());
          Expr child = bind(ast.children[i]);
          if (is_value) {
            result = CommonType(result, child.type);
          } else {
            child = RequireBool(std::move(child), "case condition");
          }
          children.push_back(std::move(child));
        }
        if (result.id == TypeId::kDecimal) result = DataType::Decimal(kMaxDecimalPrecision, result.scale);
        for (size_t i = 0; i < children.size(); ++i) {
          const bool is_value = (i % 2 == 1) || (ast.has_else && i + 1 == children.size());
          if (is_value) children[i] = CoerceExact(std::move(children[i]), result);
        }
        return Expr::Case(std::move(children), ast.has_else, result);
      }
      case AstKind::kCall:
        if (IsAggregateName(ast.name)) Fail(ErrorCode::kInvalidArgument, "aggregate " + ToSql(ast) + " not allowed here");
        Fail(ErrorCode::kNotSupported, "function '" + ast.name + "'");
      case AstKind::kInterval:
        Fail(ErrorCode::kTypeMismatch, "interval must be added to or subtracted from a date");
    }
    Fail(ErrorCode::kInternal, "unknown expression");
  }

  Expr BindBinary(const AstExpr& ast, const std::function<std::optional<Expr>(const AstExpr&)>* hook) {
    const auto& lhs = ast.children[0];
    const auto& rhs = ast.children[1];
    if (ast.op == "and" || ast.op == "or") {
      Expr left = RequireBool(BindExpr(lhs, hook), ast.op);
      Expr right = RequireBool(BindExpr(rhs, hook), ast.op);
      return ast.op == "and" ? Expr::And(std::move(left), std::move(right)) : Expr::Or(std::move(left), std::move(right));
    }
    static const std::map<std::string, CompareOp> kComparisons = {{"=", CompareOp::kEq},  {"<>", CompareOp::kNe},
                                                                  {"<", CompareOp::kLt},  {"<=", CompareOp::kLe},
                                                                  {">", CompareOp::kGt},  {">=", CompareOp::kGe}};
    if (const auto it = kComparisons.find(ast.op); it != kComparisons.end()) {
      return BindComparison(it->second, BindExpr(lhs, hook), BindExpr(rhs, hook));
    }
    const ArithOp op = ast.op == "+"   ? ArithOp::kAdd
                       : ast.op == "-" ? ArithOp::kSub
                       : ast.op == "*" ? ArithOp::kMul
                                       : ArithOp::kDiv;
    if (lhs.kind == AstKind::kInterval || rhs.kind == AstKind::kInterval) {
      if (lhs.kind == AstKind::kInterval && (rhs.kind == AstKind::kInterval || op != ArithOp::kAdd)) {
        Fail(ErrorCode::kTypeMismatch, "unsupported interval arithmetic in " + ToSql(ast));
      }
      if (op != ArithOp::kAdd && op != ArithOp::kSub) {
        Fail(ErrorCode::kTypeMismatch, "intervals can only be added or subtracted");
      }
      const AstExpr& interval = lhs.kind == AstKind::kInterval ? lhs : rhs;
      Expr date = BindExpr(lhs.kind == AstKind::kInterval ? rhs : lhs, hook);
      return BindDateInterval(std::move(date), interval, op == ArithOp::kSub);
    }
    return BindArithmetic(op, BindExpr(lhs, hook), BindExpr(rhs, hook));
  }

  static Expr BindDateInterval(Expr date, const AstExpr& interval, bool subtract) {
    if (date.type.id != TypeId::kDate) {
      Fail(ErrorCode::kTypeMismatch, "interval arithmetic on " + date.type.ToString());
    }
    int64_t count = std::stoll(interval.text);
    if (subtract) count = -count;
    if (date.kind == ExprKind::kLiteral && !date.literal.IsNull()) {
      const int64_t days = date.literal.AsInt();
      if (interval.unit == "day") return Expr::Literal(Value::Date(days + count));
      const int64_t months = interval.unit == "year" ? count * 12 : count;
      return Expr::Literal(Value::Date(dates::AddMonths(days, months)));
    }
    if (interval.unit != "day") {
      Fail(ErrorCode::kNotSupported, "month and year intervals on non-constant dates");
    }
    return Expr::Arith(ArithOp::kAdd, std::move(date), Expr::Literal(Value::Int64(count)), DataType::Date());
  }

  // Binds a select or order-by expression above the aggregation.
  Expr BindAggregated(const AstExpr& ast, const std::string& preferred_name) {
    std::function<std::optional<Expr>(const AstExpr&)> hook = [&](const AstExpr& node) -> std::optional<Expr> {
      if (node.kind == AstKind::kCall && IsAggregateName(node.name)) {
        const auto& call = RegisterAggregate(node, &node == &ast ? preferred_name : "");
        return Expr::Column(call.name, call.type, call.nullable);
      }
      if (!ContainsAggregate(node) && node.kind != AstKind::kLiteral && node.kind != AstKind::kInterval) {
        Expr bound = BindExpr(node);
        for (const auto& key : keys_) {
          if (key.expr == bound) return Expr::Column(key.name, key.expr.type, key.expr.nullable);
        }
        if (node.kind == AstKind::kColumn) {
          Fail(ErrorCode::kUngroupedColumn,
               "column '" + ToSql(node) + "' must appear in the group by clause or be used in an aggregate");
        }
        if (bound.IsConstant()) return bound;
      }
      return std::nullopt;
    };
    return BindExpr(ast, &hook);
  }

  const AggregateCall& RegisterAggregate(const AstExpr& ast, const std::string& preferred_name) {
    for (const auto& child : ast.children) {
      if (ContainsAggregate(child)) Fail(ErrorCode::kInvalidArgument, "nested aggregate in " + ToSql(ast));
    }
    AggFunc func = AggFunc::kCountStar;
    std::optional<Expr> arg;
    if (ast.star) {
      if (ast.name != "count") Fail(ErrorCode::kInvalidArgument, ast.name + "(*) is not valid");
    } else {
      if (ast.children.size() != 1) {
        Fail(ErrorCode::kInvalidArgument, ast.name + " takes exactly one argument");
      }
      arg = BindExpr(ast.children[0]);
      func = ast.name == "sum"     ? AggFunc::kSum
             : ast.name == "avg"   ? AggFunc::kAvg
             : ast.name == "count" ? AggFunc::kCount
             : ast.name == "min"   ? AggFunc::kMin
                                   : AggFunc::kMax;
    }
    for (const auto& existing : aggregates_) {
      if (existing.func == func && existing.arg == arg) return existing;
    }
    std::string name = preferred_name.empty() ? "#agg" + std::to_string(aggregates_.size()) : preferred_name;
    aggregates_.push_back(AggregateCall::Make(func, std::move(arg), std::move(name)));
    return aggregates_.back();
  }

  const Catalog& catalog_;
  Scope scope_;
  std::vector<NamedExpr> keys_;
  std::vector<AggregateCall> aggregates_;
};

}  // namespace

LogicalPlan Bind(const SelectStatement& statement, const Catalog& catalog) {
  return Binder(catalog).BindStatement(statement);
}

LogicalPlan BindSql(std::string_view sql, const Catalog& catalog) { return Bind(Parse(sql), catalog); }

}  // namespace skylite
