#include "skylite/bench/oracle.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>

#include "skylite/common/errors.hpp"
#include "skylite/sql/binder.hpp"
#include "skylite/storage/columnar_file.hpp"

namespace skylite {

namespace {

using Row = std::vector<Value>;

struct Rows {
  Schema schema;
  std::vector<Row> rows;
};

// Orders value tuples; nulls first, then values by CompareNonNull.
struct TupleLess {
  bool operator()(const Row& a, const Row& b) const {
    for (size_t i = 0; i < a.size(); ++i) {
      if (a[i].IsNull() != b[i].IsNull()) return a[i].IsNull();
      if (a[i].IsNull()) continue;
      const int c = CompareNonNull(a[i], b[i]);
      if (c != 0) return c < 0;
    }
    return false;
  }
};

Value Lookup(const Schema& schema, const Row& row, const std::string& column) {
  const int index = schema.IndexOf(column);
  if (index < 0) Fail(ErrorCode::kInternal, "oracle row has no column " + column);
  return row[static_cast<size_t>(index)];
}

Value Evaluate(const Expr& expr, const Schema& schema, const Row& row) {
  return EvaluateScalar(expr, [&](const std::string& column) { return Lookup(schema, row, column); });
}

bool Holds(const Expr& predicate, const Schema& schema, const Row& row) {
  const Value value = Evaluate(predicate, schema, row);
  return !value.IsNull() && value.AsBool();
}

void CollectColumns(const Expr& expr, std::set<std::string>& names) {
  if (expr.kind == ExprKind::kColumn) names.insert(expr.column);
  for (const auto& child : expr.children) CollectColumns(child, names);
}

void CollectPlanColumns(const LogicalPlan& plan, std::set<std::string>& names) {
  if (plan.predicate) CollectColumns(*plan.predicate, names);
  for (const auto& projection : plan.projections) CollectColumns(projection.expr, names);
  for (const auto& key : plan.group_keys) CollectColumns(key.expr, names);
  for (const auto& call : plan.aggregates) {
    if (call.arg) CollectColumns(*call.arg, names);
  }
  for (const auto& [left, right] : plan.join_keys) {
    CollectColumns(left, names);
    CollectColumns(right, names);
  }
  for (const auto& key : plan.sort_keys) CollectColumns(key.expr, names);
  for (const auto& child : plan.children) CollectPlanColumns(child, names);
}

Value MakeNumber(__int128 value, const DataType& type) {
  if (value > INT64_MAX || value < INT64_MIN) Fail(ErrorCode::kInvalidArgument, "numeric overflow");
  const auto narrow = static_cast<int64_t>(value);
  return type.id == TypeId::kDecimal ? Value::Decimal(narrow, type.precision, type.scale) : Value::Int64(narrow);
}

// Running state of one aggregate call for one group.
struct Accumulator {
  __int128 sum = 0;
  double float_sum = 0;
  int64_t count = 0;
  bool any = false;
  Value extreme;
};

class Oracle {
 public:
  Oracle(const Simulator& sim, const Catalog& catalog, std::set<std::string> needed)
      : sim_(sim), catalog_(catalog), needed_(std::move(needed)) {}

  Rows Run(const LogicalPlan& plan) {
    switch (plan.kind) {
      case PlanKind::kScan:
        return Scan(plan, std::nullopt);
      case PlanKind::kOneRow:
        return Rows{Schema(), {Row{}}};
      case PlanKind::kFilter:
        if (plan.child().kind == PlanKind::kScan) return Scan(plan.child(), plan.predicate);
        if (plan.child().kind == PlanKind::kJoin) return Join(plan.child(), SplitConjuncts(*plan.predicate));
        return Filter(Run(plan.child()), *plan.predicate);
      case PlanKind::kProject:
        return Project(Run(plan.child()), plan);
      case PlanKind::kAggregate:
        return Aggregate(Run(plan.child()), plan);
      case PlanKind::kJoin:
        return Join(plan, {});
      case PlanKind::kSort:
        return Sort(Run(plan.child()), plan.sort_keys);
      case PlanKind::kLimit: {
        Rows input = Run(plan.child());
        if (static_cast<int64_t>(input.rows.size()) > plan.limit) input.rows.resize(static_cast<size_t>(plan.limit));
        return input;
      }
    }
    Fail(ErrorCode::kInternal, "unknown plan node");
  }

 private:
  Rows Scan(const LogicalPlan& scan, const std::optional<Expr>& predicate) {
    const TableEntry& table = catalog_.Resolve(scan.table);
    std::vector<std::string> columns;
    for (const auto& name : scan.columns) {
      if (needed_.count(name)) columns.push_back(name);
    }
    if (columns.empty() && !scan.columns.empty()) columns.push_back(scan.columns.front());
    Rows result;
    for (const auto& name : columns) result.schema.Append(table.schema.At(table.schema.IndexOrFail(name)));
    for (const auto& object : table.objects) {
      const auto stored = sim_.PeekObject(object.bucket, object.key);
      if (!stored) Fail(ErrorCode::kNoSuchKey, "object " + object.key + " is missing");
      for (const auto& batch : ReadColumnarFile(*stored->bytes, columns)) {
        for (size_t r = 0; r < batch.NumRows(); ++r) {
          Row row = batch.Row(r);
          if (predicate && !Holds(*predicate, result.schema, row)) continue;
          result.rows.push_back(std::move(row));
        }
      }
    }
    return result;
  }

  static Rows Filter(Rows input, const Expr& predicate) {
    Rows result{input.schema, {}};
    for (auto& row : input.rows) {
      if (Holds(predicate, input.schema, row)) result.rows.push_back(std::move(row));
    }
    return result;
  }

  static bool Covers(const Schema& schema, const Expr& expr) {
    std::set<std::string> names;
    CollectColumns(expr, names);
    return std::all_of(names.begin(), names.end(), [&](const auto& n) { return schema.IndexOf(n) >= 0; });
  }

  // Inner join of the two children under the given conjuncts: single-side conjuncts filter their side, column
  // equalities across the sides drive a hash lookup, the remainder is checked on each joined row.
  Rows Join(const LogicalPlan& join, std::vector<Expr> conjuncts) {
    Rows left = Run(join.child(0));
    Rows right = Run(join.child(1));
    std::vector<std::pair<Expr, Expr>> keys = join.join_keys;
    std::vector<Expr> residual;
    for (auto& conjunct : conjuncts) {
      if (Covers(left.schema, conjunct)) {
        left = Filter(std::move(left), conjunct);
      } else if (Covers(right.schema, conjunct)) {
        right = Filter(std::move(right), conjunct);
      } else if (conjunct.kind == ExprKind::kCompare && conjunct.compare == CompareOp::kEq &&
                 conjunct.children[0].type == conjunct.children[1].type &&
                 Covers(left.schema, conjunct.children[0]) && Covers(right.schema, conjunct.children[1])) {
        keys.emplace_back(conjunct.children[0], conjunct.children[1]);
      } else if (conjunct.kind == ExprKind::kCompare && conjunct.compare == CompareOp::kEq &&
                 conjunct.children[0].type == conjunct.children[1].type &&
                 Covers(right.schema, conjunct.children[0]) && Covers(left.schema, conjunct.children[1])) {
        keys.emplace_back(conjunct.children[1], conjunct.children[0]);
      } else {
        residual.push_back(std::move(conjunct));
      }
    }
    Rows result;
    for (const auto& field : left.schema.Fields()) result.schema.Append(field);
    for (const auto& field : right.schema.Fields()) result.schema.Append(field);
    const auto emit = [&](const Row& l, const Row& r) {
      Row row = l;
      row.insert(row.end(), r.begin(), r.end());
      for (const auto& conjunct : residual) {
        if (!Holds(conjunct, result.schema, row)) return;
      }
      result.rows.push_back(std::move(row));
    };
    if (keys.empty()) {
      for (const auto& l : left.rows) {
        for (const auto& r : right.rows) emit(l, r);
      }
      return result;
    }
    const auto key_of = [&](const Schema& schema, const Row& row, bool left_side, Row& key) {
      key.clear();
      for (const auto& [l, r] : keys) {
        Value value = Evaluate(left_side ? l : r, schema, row);
        if (value.IsNull()) return false;
        key.push_back(std::move(value));
      }
      return true;
    };
    std::map<Row, std::vector<size_t>, TupleLess> index;
    Row key;
    for (size_t i = 0; i < right.rows.size(); ++i) {
      if (key_of(right.schema, right.rows[i], false, key)) index[key].push_back(i);
    }
    for (const auto& l : left.rows) {
      if (!key_of(left.schema, l, true, key)) continue;
      const auto it = index.find(key);
      if (it == index.end()) continue;
      for (size_t i : it->second) emit(l, right.rows[i]);
    }
    return result;
  }

  static Rows Project(const Rows& input, const LogicalPlan& plan) {
    Rows result{plan.schema, {}};
    for (const auto& row : input.rows) {
      Row out;
      for (const auto& projection : plan.projections) {
        Value value = Evaluate(projection.expr, input.schema, row);
        out.push_back(value.IsNull() ? value : CastValue(value, projection.expr.type));
      }
      result.rows.push_back(std::move(out));
    }
    return result;
  }

  static void Accumulate(const AggregateCall& call, Accumulator& acc, const Rows& input, const Row& row) {
    if (call.func == AggFunc::kCountStar) {
      ++acc.count;
      return;
    }
    const Value value = Evaluate(*call.arg, input.schema, row);
    if (value.IsNull()) return;
    ++acc.count;
    switch (call.func) {
      case AggFunc::kSum:
      case AggFunc::kAvg:
        if (value.Type().id == TypeId::kFloat64) {
          acc.float_sum += value.AsDouble();
        } else {
          acc.sum += value.AsInt();
        }
        break;
      case AggFunc::kMin:
      case AggFunc::kMax:
        if (!acc.any || (call.func == AggFunc::kMin ? CompareNonNull(value, acc.extreme) < 0
                                                    : CompareNonNull(value, acc.extreme) > 0)) {
          acc.extreme = value;
        }
        break;
      default:
        break;
    }
    acc.any = true;
  }

  static Value Result(const AggregateCall& call, const Accumulator& acc) {
    switch (call.func) {
      case AggFunc::kCountStar:
      case AggFunc::kCount:
        return Value::Int64(acc.count);
      case AggFunc::kSum:
        if (!acc.any) return Value::Null(call.type);
        if (call.type.id == TypeId::kFloat64) return Value::Float64(acc.float_sum);
        return MakeNumber(acc.sum, call.type);
      case AggFunc::kMin:
      case AggFunc::kMax:
        return acc.any ? acc.extreme : Value::Null(call.type);
      case AggFunc::kAvg: {
        if (!acc.any) return Value::Null(call.type);
        if (call.type.id == TypeId::kFloat64) return Value::Float64(acc.float_sum / static_cast<double>(acc.count));
        const int scale = call.arg->type.id == TypeId::kDecimal ? call.arg->type.scale : 0;
        // sum / count at six decimal places, ties to even.
        __int128 numerator = acc.sum;
        __int128 denominator = acc.count;
        for (int s = scale; s < kAvgScale; ++s) numerator *= 10;
        for (int s = kAvgScale; s < scale; ++s) denominator *= 10;
        __int128 quotient = numerator / denominator;
        __int128 remainder = numerator % denominator;
        if (remainder < 0) remainder = -remainder;
        const __int128 twice = remainder * 2;
        const bool negative = (numerator < 0) != (denominator < 0);
        if (twice > denominator || (twice == denominator && quotient % 2 != 0)) quotient += negative ? -1 : 1;
        return MakeNumber(quotient, call.type);
      }
    }
    Fail(ErrorCode::kInternal, "unknown aggregate");
  }

  static Rows Aggregate(const Rows& input, const LogicalPlan& plan) {
    std::map<Row, size_t, TupleLess> groups;
    std::vector<Row> keys;
    std::vector<std::vector<Accumulator>> states;
    for (const auto& row : input.rows) {
      Row key;
      for (const auto& group_key : plan.group_keys) key.push_back(Evaluate(group_key.expr, input.schema, row));
      auto [it, inserted] = groups.emplace(key, keys.size());
      if (inserted) {
        keys.push_back(key);
        states.emplace_back(plan.aggregates.size());
      }
      for (size_t i = 0; i < plan.aggregates.size(); ++i) {
        Accumulate(plan.aggregates[i], states[it->second][i], input, row);
      }
    }
    if (plan.group_keys.empty() && keys.empty()) {
      keys.emplace_back();
      states.emplace_back(plan.aggregates.size());
    }
    Rows result{plan.schema, {}};
    for (size_t g = 0; g < keys.size(); ++g) {
      Row row = keys[g];
      for (size_t i = 0; i < plan.aggregates.size(); ++i) row.push_back(Result(plan.aggregates[i], states[g][i]));
      result.rows.push_back(std::move(row));
    }
    return result;
  }

  static Rows Sort(Rows input, const std::vector<SortKey>& sort_keys) {
    std::vector<Row> keys;
    for (const auto& row : input.rows) {
      Row key;
      for (const auto& sort_key : sort_keys) key.push_back(Evaluate(sort_key.expr, input.schema, row));
      keys.push_back(std::move(key));
    }
    std::vector<size_t> order(input.rows.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      for (size_t k = 0; k < sort_keys.size(); ++k) {
        const Value& x = keys[a][k];
        const Value& y = keys[b][k];
        int c = 0;
        if (x.IsNull() || y.IsNull()) {
          // Nulls are larger than any value.
          c = x.IsNull() == y.IsNull() ? 0 : (x.IsNull() ? 1 : -1);
        } else {
          c = CompareNonNull(x, y);
        }
        if (sort_keys[k].descending) c = -c;
        if (c != 0) return c < 0;
      }
      return false;
    });
    Rows result{input.schema, {}};
    for (size_t i : order) result.rows.push_back(std::move(input.rows[i]));
    return result;
  }

  const Simulator& sim_;
  const Catalog& catalog_;
  std::set<std::string> needed_;
};

}  // namespace

RecordBatch OracleExecute(const LogicalPlan& plan, const Simulator& sim, const Catalog& catalog) {
  std::set<std::string> needed;
  CollectPlanColumns(plan, needed);
  for (const auto& field : plan.schema.Fields()) needed.insert(field.name);
  Rows rows = Oracle(sim, catalog, std::move(needed)).Run(plan);
  RecordBatch batch(plan.schema);
  for (const auto& row : rows.rows) {
    Row projected;
    for (const auto& field : plan.schema.Fields()) projected.push_back(Lookup(rows.schema, row, field.name));
    batch.AppendRow(projected);
  }
  return batch;
}

RecordBatch OracleQuery(const std::string& sql, const Simulator& sim, const Catalog& catalog) {
  return OracleExecute(BindSql(sql, catalog), sim, catalog);
}

}  // namespace skylite
