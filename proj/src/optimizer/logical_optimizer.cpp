#include "skylite/optimizer/logical_optimizer.hpp"

#include <algorithm>
#include <set>

#include "skylite/common/errors.hpp"

namespace skylite {

namespace {

bool IsBoolLiteral(const Expr& expr, bool value) {
  return expr.kind == ExprKind::kLiteral && !expr.literal.IsNull() && expr.literal.Type().id == TypeId::kBool &&
         expr.literal.AsBool() == value;
}

std::set<std::string> ColumnsOf(const Expr& expr) {
  std::set<std::string> columns;
  expr.CollectColumns(columns);
  return columns;
}

std::set<std::string> SchemaNames(const Schema& schema) {
  std::set<std::string> names;
  for (const auto& field : schema.Fields()) names.insert(field.name);
  return names;
}

bool SubsetOf(const std::set<std::string>& columns, const std::set<std::string>& available) {
  return std::includes(available.begin(), available.end(), columns.begin(), columns.end());
}

// Replaces column references according to `mapping` (name -> expression).
Expr Substitute(const Expr& expr, const std::map<std::string, Expr>& mapping) {
  if (expr.kind == ExprKind::kColumn) {
    const auto it = mapping.find(expr.column);
    return it == mapping.end() ? expr : it->second;
  }
  Expr result = expr;
  for (auto& child : result.children) child = Substitute(child, mapping);
  return result;
}

// Filter node with the conjuncts folded into one predicate; no node when the list is empty.
LogicalPlan WrapFilter(LogicalPlan child, std::vector<Expr> conjuncts) {
  if (conjuncts.empty()) return child;
  return LogicalPlan::Filter(std::move(child), MakeConjunction(std::move(conjuncts)));
}

LogicalPlan FoldPlan(LogicalPlan plan) {
  for (auto& child : plan.children) child = FoldPlan(std::move(child));
  if (plan.predicate) plan.predicate = FoldConstants(*plan.predicate);
  for (auto& projection : plan.projections) projection.expr = FoldConstants(projection.expr);
  for (auto& key : plan.group_keys) key.expr = FoldConstants(key.expr);
  for (auto& call : plan.aggregates) {
    if (call.arg) call.arg = FoldConstants(*call.arg);
  }
  for (auto& key : plan.sort_keys) key.expr = FoldConstants(key.expr);
  if (plan.kind == PlanKind::kFilter && IsBoolLiteral(*plan.predicate, true)) return std::move(plan.children[0]);
  return plan;
}

LogicalPlan Pushdown(LogicalPlan plan);

// Pushes the conjuncts of a filter sitting directly above `child`; returns the rewritten subtree.
LogicalPlan PushFilter(std::vector<Expr> conjuncts, LogicalPlan child) {
  switch (child.kind) {
    case PlanKind::kFilter: {
      auto merged = SplitConjuncts(*child.predicate);
      merged.insert(merged.end(), conjuncts.begin(), conjuncts.end());
      return PushFilter(std::move(merged), std::move(child.children[0]));
    }
    case PlanKind::kJoin: {
      const auto left_names = SchemaNames(child.children[0].schema);
      const auto right_names = SchemaNames(child.children[1].schema);
      std::vector<Expr> left, right, above;
      for (auto& conjunct : conjuncts) {
        const auto columns = ColumnsOf(conjunct);
        if (columns.empty()) {
          above.push_back(std::move(conjunct));
        } else if (SubsetOf(columns, left_names)) {
          left.push_back(std::move(conjunct));
        } else if (SubsetOf(columns, right_names)) {
          right.push_back(std::move(conjunct));
        } else if (conjunct.kind == ExprKind::kCompare && conjunct.compare == CompareOp::kEq &&
                   SubsetOf(ColumnsOf(conjunct.children[0]), left_names) &&
                   SubsetOf(ColumnsOf(conjunct.children[1]), right_names) &&
                   !ColumnsOf(conjunct.children[0]).empty() && !ColumnsOf(conjunct.children[1]).empty()) {
          child.join_keys.emplace_back(conjunct.children[0], conjunct.children[1]);
        } else if (conjunct.kind == ExprKind::kCompare && conjunct.compare == CompareOp::kEq &&
                   SubsetOf(ColumnsOf(conjunct.children[0]), right_names) &&
                   SubsetOf(ColumnsOf(conjunct.children[1]), left_names) &&
                   !ColumnsOf(conjunct.children[0]).empty() && !ColumnsOf(conjunct.children[1]).empty()) {
          child.join_keys.emplace_back(conjunct.children[1], conjunct.children[0]);
        } else {
          above.push_back(std::move(conjunct));
        }
      }
      child.children[0] = left.empty() ? std::move(child.children[0])
                                       : PushFilter(std::move(left), std::move(child.children[0]));
      child.children[1] = right.empty() ? std::move(child.children[1])
                                        : PushFilter(std::move(right), std::move(child.children[1]));
      child.RefreshSchema();
      return WrapFilter(std::move(child), std::move(above));
    }
    case PlanKind::kProject: {
      // Only through pass-through or deterministic projections: substitute the projected expressions.
      std::map<std::string, Expr> mapping;
      for (const auto& projection : child.projections) mapping.emplace(projection.name, projection.expr);
      std::vector<Expr> below;
      for (const auto& conjunct : conjuncts) below.push_back(Substitute(conjunct, mapping));
      child.children[0] = PushFilter(std::move(below), std::move(child.children[0]));
      return child;
    }
    case PlanKind::kSort: {
      child.children[0] = PushFilter(std::move(conjuncts), std::move(child.children[0]));
      return child;
    }
    case PlanKind::kAggregate: {
      std::map<std::string, Expr> key_mapping;
      for (const auto& key : child.group_keys) key_mapping.emplace(key.name, key.expr);
      std::vector<Expr> below, above;
      for (auto& conjunct : conjuncts) {
        const auto columns = ColumnsOf(conjunct);
        bool keys_only = !columns.empty();
        for (const auto& column : columns) keys_only = keys_only && key_mapping.count(column) > 0;
        if (keys_only) {
          below.push_back(Substitute(conjunct, key_mapping));
        } else {
          above.push_back(std::move(conjunct));
        }
      }
      if (!below.empty()) child.children[0] = PushFilter(std::move(below), std::move(child.children[0]));
      return WrapFilter(std::move(child), std::move(above));
    }
    default:
      // Scans, limits and single-row sources keep the filter directly above them.
      return WrapFilter(std::move(child), std::move(conjuncts));
  }
}

LogicalPlan Pushdown(LogicalPlan plan) {
  if (plan.kind == PlanKind::kFilter) {
    auto conjuncts = SplitConjuncts(*plan.predicate);
    auto child = Pushdown(std::move(plan.children[0]));
    if (child.kind == PlanKind::kLimit) return WrapFilter(std::move(child), std::move(conjuncts));
    auto pushed = PushFilter(std::move(conjuncts), std::move(child));
    // Subtrees created by the push are already in pushed-down form except below new filters; recurse once more.
    for (auto& grandchild : pushed.children) grandchild = Pushdown(std::move(grandchild));
    return pushed;
  }
  for (auto& child : plan.children) child = Pushdown(std::move(child));
  return plan;
}

int TypeWidth(const DataType& type) {
  switch (type.id) {
    case TypeId::kBool:
      return 1;
    case TypeId::kDate:
      return 4;
    case TypeId::kString:
      return 16;
    default:
      return 8;
  }
}

// Removes columns and computations not needed by the parent. `required` names columns of plan.schema.
LogicalPlan Prune(LogicalPlan plan, const std::set<std::string>& required) {
  switch (plan.kind) {
    case PlanKind::kScan: {
      std::vector<std::string> kept;
      for (const auto& column : plan.columns) {
        if (required.count(column)) kept.push_back(column);
      }
      if (kept.empty() && !plan.columns.empty()) {
        // Row counts still matter (count(*)); keep the narrowest column.
        std::string narrowest = plan.columns.front();
        for (const auto& column : plan.columns) {
          const auto& field = plan.table_schema.At(plan.table_schema.IndexOrFail(column));
          const auto& best = plan.table_schema.At(plan.table_schema.IndexOrFail(narrowest));
          if (TypeWidth(field.type) < TypeWidth(best.type)) narrowest = column;
        }
        kept.push_back(narrowest);
      }
      plan.columns = std::move(kept);
      plan.RefreshSchema();
      return plan;
    }
    case PlanKind::kOneRow:
      return plan;
    case PlanKind::kFilter: {
      auto needed = required;
      plan.predicate->CollectColumns(needed);
      plan.children[0] = Prune(std::move(plan.children[0]), needed);
      plan.RefreshSchema();
      return plan;
    }
    case PlanKind::kProject: {
      std::vector<NamedExpr> kept;
      for (auto& projection : plan.projections) {
        if (required.count(projection.name)) kept.push_back(std::move(projection));
      }
      plan.projections = std::move(kept);
      std::set<std::string> needed;
      for (const auto& projection : plan.projections) projection.expr.CollectColumns(needed);
      plan.children[0] = Prune(std::move(plan.children[0]), needed);
      plan.RefreshSchema();
      return plan;
    }
    case PlanKind::kAggregate: {
      std::vector<AggregateCall> kept;
      for (auto& call : plan.aggregates) {
        if (required.count(call.name)) kept.push_back(std::move(call));
      }
      plan.aggregates = std::move(kept);
      std::set<std::string> needed;
      for (const auto& key : plan.group_keys) key.expr.CollectColumns(needed);
      for (const auto& call : plan.aggregates) {
        if (call.arg) call.arg->CollectColumns(needed);
      }
      plan.children[0] = Prune(std::move(plan.children[0]), needed);
      plan.RefreshSchema();
      return plan;
    }
    case PlanKind::kJoin: {
      auto needed = required;
      for (const auto& [left, right] : plan.join_keys) {
        left.CollectColumns(needed);
        right.CollectColumns(needed);
      }
      for (auto& child : plan.children) {
        std::set<std::string> side;
        for (const auto& field : child.schema.Fields()) {
          if (needed.count(field.name)) side.insert(field.name);
        }
        child = Prune(std::move(child), side);
      }
      plan.RefreshSchema();
      return plan;
    }
    case PlanKind::kSort: {
      auto needed = required;
      for (const auto& key : plan.sort_keys) key.expr.CollectColumns(needed);
      plan.children[0] = Prune(std::move(plan.children[0]), needed);
      plan.RefreshSchema();
      return plan;
    }
    case PlanKind::kLimit:
      plan.children[0] = Prune(std::move(plan.children[0]), required);
      plan.RefreshSchema();
      return plan;
  }
  return plan;
}

LogicalPlan OrderJoins(LogicalPlan plan, const TableBytes& stats) {
  for (auto& child : plan.children) child = OrderJoins(std::move(child), stats);
  if (plan.kind == PlanKind::kJoin) {
    const uint64_t left = EstimateBytes(plan.children[0], stats);
    const uint64_t right = EstimateBytes(plan.children[1], stats);
    if (left < right) {
      std::swap(plan.children[0], plan.children[1]);
      for (auto& [probe, build] : plan.join_keys) std::swap(probe, build);
      plan.RefreshSchema();
    }
  }
  return plan;
}

// Restores the original output column order when join reordering changed it.
LogicalPlan RestoreOrder(LogicalPlan plan, const Schema& original) {
  if (plan.schema == original) return plan;
  std::vector<NamedExpr> projections;
  for (const auto& field : original.Fields()) {
    projections.push_back({Expr::Column(field.name, field.type, field.nullable), field.name});
  }
  return LogicalPlan::Project(std::move(plan), std::move(projections));
}

}  // namespace

Expr FoldConstants(const Expr& expr) {
  Expr result = expr;
  for (auto& child : result.children) child = FoldConstants(child);
  if (result.kind == ExprKind::kAnd || result.kind == ExprKind::kOr) {
    const bool is_and = result.kind == ExprKind::kAnd;
    // x and true -> x, x and false -> false; dually for or. Null operands are left to the evaluator.
    for (size_t i = 0; i < 2; ++i) {
      if (IsBoolLiteral(result.children[i], is_and)) return result.children[1 - i];
      if (IsBoolLiteral(result.children[i], !is_and)) return result.children[i];
    }
  }
  if (result.kind != ExprKind::kLiteral && result.IsConstant()) {
    try {
      Value value = EvaluateScalar(result, [](const std::string&) -> Value {
        Fail(ErrorCode::kInternal, "constant expression references a column");
      });
      if (value.IsNull()) {
        value = Value::Null(result.type);
      } else if (!(value.Type() == result.type)) {
        value = CastValue(value, result.type);
      }
      return Expr::Literal(std::move(value));
    } catch (const SkyliteError&) {
      // Errors such as overflow surface at run time, where the expression is evaluated.
    }
  }
  return result;
}

uint64_t EstimateBytes(const LogicalPlan& plan, const TableBytes& stats) {
  switch (plan.kind) {
    case PlanKind::kScan: {
      const auto it = stats.find(plan.table);
      if (it == stats.end() || plan.table_schema.Empty()) return 0;
      return it->second * plan.columns.size() / plan.table_schema.Size();
    }
    case PlanKind::kOneRow:
      return 0;
    default: {
      uint64_t total = 0;
      for (const auto& child : plan.children) total += EstimateBytes(child, stats);
      return total;
    }
  }
}

LogicalPlan OptimizeLogical(LogicalPlan plan, const TableBytes& stats) {
  const Schema original = plan.schema;
  const auto root_columns = SchemaNames(original);
  for (int round = 0; round < 16; ++round) {
    LogicalPlan next = FoldPlan(plan);
    next = Pushdown(std::move(next));
    next = Prune(std::move(next), root_columns);
    next = OrderJoins(std::move(next), stats);
    if (next == plan) break;
    plan = std::move(next);
  }
  return RestoreOrder(std::move(plan), original);
}

}  // namespace skylite
