#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "skylite/sim/sim_types.hpp"
#include "skylite/sql/logical_plan.hpp"
#include "skylite/storage/columnar_file.hpp"

namespace skylite {

enum class PhysOpKind {
  kScan,
  kOneRow,
  kExchangeRead,
  kFilter,
  kProject,
  kHashAggregate,
  kHashJoin,
  kSort,
  kLimit,
  kExchangeWrite,
};
enum class AggPhase { kPartial, kFinal };
enum class JoinMode { kBroadcast, kRepartition };

std::string_view PhysOpKindName(PhysOpKind kind);

// Intermediate state columns a partial aggregate emits for one call: the call's name for sum, count, min and
// max; "<name>#sum" and "<name>#count" for avg.
std::vector<Field> PartialStateFields(const AggregateCall& call);

struct PhysicalOperator {
  PhysOpKind kind = PhysOpKind::kOneRow;
  Schema output_schema;

  // kScan: table columns to read and row-group pruning predicates derived from the filter above.
  std::string table;
  std::vector<std::string> columns;
  std::vector<PrunePredicate> prune_predicates;
  // kExchangeRead: the producing pipeline.
  int input_pipeline = -1;
  // kFilter.
  std::optional<Expr> predicate;
  // kProject.
  std::vector<NamedExpr> projections;
  // kHashAggregate. A final aggregate's keys are column references into the partial output.
  AggPhase phase = AggPhase::kPartial;
  std::vector<NamedExpr> group_keys;
  std::vector<AggregateCall> aggregates;
  // kHashJoin: output is the probe columns followed by the build columns.
  JoinMode join_mode = JoinMode::kBroadcast;
  int build_pipeline = -1;
  std::vector<Expr> probe_keys;
  std::vector<Expr> build_keys;
  Schema build_schema;
  // kSort.
  std::vector<SortKey> sort_keys;
  // kLimit.
  int64_t limit = 0;
  // kExchangeWrite: one object per partition, partition = hash(keys) mod partition_count.
  int partition_count = 1;
  std::vector<Expr> partition_keys;
  StorageClass storage_class = StorageClass::kStandard;

  std::string ToString() const;
  nlohmann::json ToJson() const;
  static PhysicalOperator FromJson(const nlohmann::json& json);
  bool operator==(const PhysicalOperator&) const = default;
};

struct PipelinePlan {
  int id = 0;
  // Source first, ExchangeWrite last.
  std::vector<PhysicalOperator> operators;
  int fragment_count = 1;
  // Pipelines whose outputs this one reads (exchange input and join build sides).
  std::vector<int> dependencies;
  // Scan source: the table and its stored bytes (sizing input).
  std::string source_table;
  uint64_t input_bytes = 0;

  const PhysicalOperator& Sink() const { return operators.back(); }
  const PhysicalOperator& Source() const { return operators.front(); }
  nlohmann::json ToJson() const;
  static PipelinePlan FromJson(const nlohmann::json& json);
  bool operator==(const PipelinePlan&) const = default;
};

// Pipelines in a topological order (dependencies have lower ids); the last pipeline is the sink.
struct PhysicalQueryPlan {
  std::vector<PipelinePlan> pipelines;

  const PipelinePlan& Pipeline(int id) const { return pipelines.at(static_cast<size_t>(id)); }
  int SinkId() const { return static_cast<int>(pipelines.size()) - 1; }
  // Throws Internal when the DAG is malformed.
  void Validate() const;
  std::string Explain() const;
  nlohmann::json ToJson() const;
  static PhysicalQueryPlan FromJson(const nlohmann::json& json);
  bool operator==(const PhysicalQueryPlan&) const = default;
};

// Wire form of the plan building blocks.
nlohmann::json ExprToJson(const Expr& expr);
Expr ExprFromJson(const nlohmann::json& json);
nlohmann::json AggregateToJson(const AggregateCall& call);
AggregateCall AggregateFromJson(const nlohmann::json& json);

}  // namespace skylite
