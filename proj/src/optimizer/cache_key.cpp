#include "skylite/optimizer/cache_key.hpp"

#include <algorithm>
#include <sstream>

#include "skylite/common/hashing.hpp"

namespace skylite {

namespace {

std::string CanonicalPredicate(const Expr& predicate) {
  std::vector<std::string> conjuncts;
  for (const auto& conjunct : SplitConjuncts(predicate)) conjuncts.push_back(conjunct.ToString());
  std::sort(conjuncts.begin(), conjuncts.end());
  std::string result;
  for (const auto& conjunct : conjuncts) result += "[" + conjunct + "]";
  return result;
}

void Write(const LogicalPlan& plan, std::ostringstream& out) {
  out << PlanKindName(plan.kind) << "{";
  switch (plan.kind) {
    case PlanKind::kScan:
      out << plan.table << "@v" << plan.table_version << ":";
      for (const auto& column : plan.columns) out << column << ",";
      break;
    case PlanKind::kOneRow:
      break;
    case PlanKind::kFilter:
      out << CanonicalPredicate(*plan.predicate);
      break;
    case PlanKind::kProject:
      for (const auto& projection : plan.projections) out << projection.name << "=" << projection.expr.ToString() << ",";
      break;
    case PlanKind::kAggregate:
      out << "keys:";
      for (const auto& key : plan.group_keys) out << key.name << "=" << key.expr.ToString() << ",";
      out << "aggs:";
      for (const auto& call : plan.aggregates) out << call.name << "=" << call.ToString() << ",";
      break;
    case PlanKind::kJoin: {
      // Key order does not matter.
      std::vector<std::string> keys;
      for (const auto& [left, right] : plan.join_keys) keys.push_back(left.ToString() + "==" + right.ToString());
      std::sort(keys.begin(), keys.end());
      for (const auto& key : keys) out << key << ",";
      break;
    }
    case PlanKind::kSort:
      for (const auto& key : plan.sort_keys) out << key.expr.ToString() << (key.descending ? " desc," : " asc,");
      break;
    case PlanKind::kLimit:
      out << plan.limit;
      break;
  }
  out << "}(";
  for (const auto& child : plan.children) {
    Write(child, out);
    out << ";";
  }
  out << ")";
}

}  // namespace

std::string CanonicalPlan(const LogicalPlan& plan) {
  std::ostringstream out;
  out << "skylite-plan-v" << kCanonicalFormVersion << ":";
  Write(plan, out);
  return out.str();
}

std::string ResultCacheKey(const LogicalPlan& plan) { return Sha256Hex(CanonicalPlan(plan)); }

}  // namespace skylite
