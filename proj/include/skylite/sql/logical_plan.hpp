#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "skylite/common/types.hpp"
#include "skylite/sql/expression.hpp"

namespace skylite {

struct TableEntry;

enum class PlanKind { kScan, kOneRow, kFilter, kProject, kAggregate, kJoin, kSort, kLimit };
enum class AggFunc { kSum, kAvg, kCount, kCountStar, kMin, kMax };

std::string_view PlanKindName(PlanKind kind);
std::string_view AggFuncName(AggFunc func);

// avg results are decimal(18,6) (or float64 for float input), rounded half to even.
constexpr uint8_t kAvgScale = 6;

struct AggregateCall {
  AggFunc func = AggFunc::kCountStar;
  // Absent for count(*).
  std::optional<Expr> arg;
  std::string name;
  DataType type;
  bool nullable = true;

  static AggregateCall Make(AggFunc func, std::optional<Expr> arg, std::string name);
  std::string ToString() const;
  bool operator==(const AggregateCall&) const = default;
};

struct NamedExpr {
  Expr expr;
  std::string name;

  bool operator==(const NamedExpr&) const = default;
};

struct SortKey {
  Expr expr;
  bool descending = false;

  bool operator==(const SortKey&) const = default;
};

// Logical operator tree with value-semantics children. Factories compute the output schema.
struct LogicalPlan {
  PlanKind kind = PlanKind::kOneRow;
  Schema schema;

  // kScan: table, manifest version, and the table columns produced (in table order).
  std::string table;
  uint64_t table_version = 0;
  Schema table_schema;
  std::vector<std::string> columns;
  // kFilter.
  std::optional<Expr> predicate;
  // kProject.
  std::vector<NamedExpr> projections;
  // kAggregate: output is the keys followed by the aggregates.
  std::vector<NamedExpr> group_keys;
  std::vector<AggregateCall> aggregates;
  // kJoin (inner): pairs of (left-side, right-side) key expressions; no keys is a cross product.
  // The left child is the probe side and the right child the build side.
  std::vector<std::pair<Expr, Expr>> join_keys;
  // kSort.
  std::vector<SortKey> sort_keys;
  // kLimit.
  int64_t limit = 0;

  std::vector<LogicalPlan> children;

  static LogicalPlan Scan(const TableEntry& table, std::vector<std::string> columns);
  static LogicalPlan OneRow();
  static LogicalPlan Filter(LogicalPlan child, Expr predicate);
  static LogicalPlan Project(LogicalPlan child, std::vector<NamedExpr> projections);
  static LogicalPlan Aggregate(LogicalPlan child, std::vector<NamedExpr> keys, std::vector<AggregateCall> aggregates);
  static LogicalPlan Join(LogicalPlan left, LogicalPlan right, std::vector<std::pair<Expr, Expr>> keys);
  static LogicalPlan Sort(LogicalPlan child, std::vector<SortKey> keys);
  static LogicalPlan Limit(LogicalPlan child, int64_t limit);

  const LogicalPlan& child(size_t index = 0) const { return children.at(index); }
  // Recomputes this node's schema from its children (after a rewrite changed them).
  void RefreshSchema();
  size_t NodeCount() const;
  // Multi-line plan rendering.
  std::string Explain(int indent = 0) const;
  bool operator==(const LogicalPlan&) const = default;
};

}  // namespace skylite
