#include "skylite/sql/logical_plan.hpp"

#include "skylite/common/errors.hpp"
#include "skylite/storage/catalog.hpp"

namespace skylite {

std::string_view PlanKindName(PlanKind kind) {
  switch (kind) {
    case PlanKind::kScan:
      return "Scan";
    case PlanKind::kOneRow:
      return "OneRow";
    case PlanKind::kFilter:
      return "Filter";
    case PlanKind::kProject:
      return "Project";
    case PlanKind::kAggregate:
      return "Aggregate";
    case PlanKind::kJoin:
      return "Join";
    case PlanKind::kSort:
      return "Sort";
    case PlanKind::kLimit:
      return "Limit";
  }
  return "?";
}

std::string_view AggFuncName(AggFunc func) {
  switch (func) {
    case AggFunc::kSum:
      return "sum";
    case AggFunc::kAvg:
      return "avg";
    case AggFunc::kCount:
      return "count";
    case AggFunc::kCountStar:
      return "count_star";
    case AggFunc::kMin:
      return "min";
    case AggFunc::kMax:
      return "max";
  }
  return "?";
}

AggregateCall AggregateCall::Make(AggFunc func, std::optional<Expr> arg, std::string name) {
  AggregateCall call;
  call.func = func;
  call.name = std::move(name);
  switch (func) {
    case AggFunc::kCountStar:
    case AggFunc::kCount:
      call.type = DataType::Int64();
      call.nullable = false;
      break;
    case AggFunc::kSum:
      if (!arg->type.IsNumeric()) Fail(ErrorCode::kTypeMismatch, "sum of non-numeric " + arg->type.ToString());
      call.type = arg->type.id == TypeId::kDecimal ? DataType::Decimal(kMaxDecimalPrecision, arg->type.scale)
                                                   : arg->type;
      break;
    case AggFunc::kAvg:
      if (!arg->type.IsNumeric()) Fail(ErrorCode::kTypeMismatch, "avg of non-numeric " + arg->type.ToString());
      call.type = arg->type.id == TypeId::kFloat64 ? DataType::Float64()
                                                   : DataType::Decimal(kMaxDecimalPrecision, kAvgScale);
      break;
    case AggFunc::kMin:
    case AggFunc::kMax:
      if (arg->type.id == TypeId::kNull) Fail(ErrorCode::kTypeMismatch, "min/max of null");
      call.type = arg->type;
      break;
  }
  call.arg = std::move(arg);
  return call;
}

std::string AggregateCall::ToString() const {
  if (func == AggFunc::kCountStar) return "count(*)";
  return std::string(AggFuncName(func)) + "(" + arg->ToString() + ")";
}

LogicalPlan LogicalPlan::Scan(const TableEntry& table, std::vector<std::string> columns) {
  LogicalPlan plan;
  plan.kind = PlanKind::kScan;
  plan.table = table.name;
  plan.table_version = table.version;
  plan.table_schema = table.schema;
  plan.columns = std::move(columns);
  plan.RefreshSchema();
  return plan;
}

LogicalPlan LogicalPlan::OneRow() {
  LogicalPlan plan;
  plan.kind = PlanKind::kOneRow;
  return plan;
}

LogicalPlan LogicalPlan::Filter(LogicalPlan child, Expr predicate) {
  if (predicate.type.id != TypeId::kBool && predicate.type.id != TypeId::kNull) {
    Fail(ErrorCode::kTypeMismatch, "filter predicate must be boolean, got " + predicate.type.ToString());
  }
  LogicalPlan plan;
  plan.kind = PlanKind::kFilter;
  plan.predicate = std::move(predicate);
  plan.children.push_back(std::move(child));
  plan.RefreshSchema();
  return plan;
}

LogicalPlan LogicalPlan::Project(LogicalPlan child, std::vector<NamedExpr> projections) {
  LogicalPlan plan;
  plan.kind = PlanKind::kProject;
  plan.projections = std::move(projections);
  plan.children.push_back(std::move(child));
  plan.RefreshSchema();
  return plan;
}

LogicalPlan LogicalPlan::Aggregate(LogicalPlan child, std::vector<NamedExpr> keys,
                                   std::vector<AggregateCall> aggregates) {
  LogicalPlan plan;
  plan.kind = PlanKind::kAggregate;
  plan.group_keys = std::move(keys);
  plan.aggregates = std::move(aggregates);
  plan.children.push_back(std::move(child));
  plan.RefreshSchema();
  return plan;
}

LogicalPlan LogicalPlan::Join(LogicalPlan left, LogicalPlan right, std::vector<std::pair<Expr, Expr>> keys) {
  LogicalPlan plan;
  plan.kind = PlanKind::kJoin;
  plan.join_keys = std::move(keys);
  plan.children.push_back(std::move(left));
  plan.children.push_back(std::move(right));
  plan.RefreshSchema();
  return plan;
}

LogicalPlan LogicalPlan::Sort(LogicalPlan child, std::vector<SortKey> keys) {
  LogicalPlan plan;
  plan.kind = PlanKind::kSort;
  plan.sort_keys = std::move(keys);
  plan.children.push_back(std::move(child));
  plan.RefreshSchema();
  return plan;
}

LogicalPlan LogicalPlan::Limit(LogicalPlan child, int64_t limit) {
  if (limit < 0) Fail(ErrorCode::kInvalidArgument, "negative limit");
  LogicalPlan plan;
  plan.kind = PlanKind::kLimit;
  plan.limit = limit;
  plan.children.push_back(std::move(child));
  plan.RefreshSchema();
  return plan;
}

void LogicalPlan::RefreshSchema() {
  switch (kind) {
    case PlanKind::kScan: {
      std::vector<Field> fields;
      for (const auto& name : columns) fields.push_back(table_schema.At(table_schema.IndexOrFail(name)));
      schema = Schema(std::move(fields));
      return;
    }
    case PlanKind::kOneRow:
      schema = Schema();
      return;
    case PlanKind::kFilter:
    case PlanKind::kSort:
    case PlanKind::kLimit:
      schema = children.at(0).schema;
      return;
    case PlanKind::kProject: {
      std::vector<Field> fields;
      for (const auto& projection : projections) {
        fields.push_back({projection.name, projection.expr.type, projection.expr.nullable});
      }
      schema = Schema(std::move(fields));
      return;
    }
    case PlanKind::kAggregate: {
      std::vector<Field> fields;
      for (const auto& key : group_keys) fields.push_back({key.name, key.expr.type, key.expr.nullable});
      for (const auto& call : aggregates) fields.push_back({call.name, call.type, call.nullable});
      schema = Schema(std::move(fields));
      return;
    }
    case PlanKind::kJoin: {
      std::vector<Field> fields = children.at(0).schema.Fields();
      for (const auto& field : children.at(1).schema.Fields()) fields.push_back(field);
      schema = Schema(std::move(fields));
      return;
    }
  }
}

size_t LogicalPlan::NodeCount() const {
  size_t count = 1;
  for (const auto& child : children) count += child.NodeCount();
  return count;
}

std::string LogicalPlan::Explain(int indent) const {
  std::string out(static_cast<size_t>(indent) * 2, ' ');
  out += PlanKindName(kind);
  switch (kind) {
    case PlanKind::kScan: {
      out += " " + table + " v" + std::to_string(table_version) + " [";
      for (size_t i = 0; i < columns.size(); ++i) out += (i ? ", " : "") + columns[i];
      out += "]";
      break;
    }
    case PlanKind::kFilter:
      out += " " + predicate->ToString();
      break;
    case PlanKind::kProject:
      for (size_t i = 0; i < projections.size(); ++i) {
        out += (i ? ", " : " ") + projections[i].expr.ToString() + " as " + projections[i].name;
      }
      break;
    case PlanKind::kAggregate:
      out += " keys [";
      for (size_t i = 0; i < group_keys.size(); ++i) {
        out += (i ? ", " : "") + group_keys[i].expr.ToString() + " as " + group_keys[i].name;
      }
      out += "] aggs [";
      for (size_t i = 0; i < aggregates.size(); ++i) {
        out += (i ? ", " : "") + aggregates[i].ToString() + " as " + aggregates[i].name;
      }
      out += "]";
      break;
    case PlanKind::kJoin:
      out += " on [";
      for (size_t i = 0; i < join_keys.size(); ++i) {
        out += (i ? ", " : "") + join_keys[i].first.ToString() + " = " + join_keys[i].second.ToString();
      }
      out += "]";
      break;
    case PlanKind::kSort:
      for (size_t i = 0; i < sort_keys.size(); ++i) {
        out += (i ? ", " : " ") + sort_keys[i].expr.ToString() + (sort_keys[i].descending ? " desc" : "");
      }
      break;
    case PlanKind::kLimit:
      out += " " + std::to_string(limit);
      break;
    case PlanKind::kOneRow:
      break;
  }
  out += "\n";
  for (const auto& child : children) out += child.Explain(indent + 1);
  return out;
}

}  // namespace skylite
