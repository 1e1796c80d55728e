#include "skylite/optimizer/physical_planner.hpp"

#include "skylite/common/errors.hpp"

namespace skylite {

namespace {

// A pipeline under construction.
struct OpenPipeline {
  std::vector<PhysicalOperator> operators;
  int fragment_count = 1;
  std::vector<int> dependencies;
  std::string source_table;
  uint64_t input_bytes = 0;
  Schema schema;
};

std::optional<PruneOp> ToPruneOp(CompareOp op) {
  switch (op) {
    case CompareOp::kEq:
      return PruneOp::kEq;
    case CompareOp::kLt:
      return PruneOp::kLt;
    case CompareOp::kLe:
      return PruneOp::kLe;
    case CompareOp::kGt:
      return PruneOp::kGt;
    case CompareOp::kGe:
      return PruneOp::kGe;
    case CompareOp::kNe:
      return std::nullopt;
  }
  return std::nullopt;
}

// "column op literal" conjuncts over scanned columns become row-group pruning predicates.
std::vector<PrunePredicate> PrunePredicatesOf(const Expr& predicate, const std::vector<std::string>& columns) {
  std::vector<PrunePredicate> result;
  for (const auto& conjunct : SplitConjuncts(predicate)) {
    if (conjunct.kind != ExprKind::kCompare) continue;
    const Expr* column = &conjunct.children[0];
    const Expr* literal = &conjunct.children[1];
    CompareOp op = conjunct.compare;
    if (column->kind == ExprKind::kLiteral && literal->kind == ExprKind::kColumn) {
      std::swap(column, literal);
      op = FlipCompare(op);
    }
    if (column->kind != ExprKind::kColumn || literal->kind != ExprKind::kLiteral || literal->literal.IsNull()) continue;
    if (std::find(columns.begin(), columns.end(), column->column) == columns.end()) continue;
    const auto prune_op = ToPruneOp(op);
    if (!prune_op) continue;
    result.push_back({column->column, *prune_op, literal->literal});
  }
  return result;
}

DataType KeyType(const DataType& a, const DataType& b) {
  if (a == b) return a;
  if (a.id == TypeId::kFloat64 || b.id == TypeId::kFloat64) return DataType::Float64();
  if ((a.id == TypeId::kDecimal || a.id == TypeId::kInt64) && (b.id == TypeId::kDecimal || b.id == TypeId::kInt64)) {
    const uint8_t scale = std::max(a.id == TypeId::kDecimal ? a.scale : 0, b.id == TypeId::kDecimal ? b.scale : 0);
    return DataType::Decimal(kMaxDecimalPrecision, scale);
  }
  Fail(ErrorCode::kTypeMismatch, "join keys of types " + a.ToString() + " and " + b.ToString());
}

Expr CastTo(Expr expr, const DataType& type) {
  return expr.type == type ? expr : Expr::Cast(std::move(expr), type);
}

class PhysicalPlanner {
 public:
  PhysicalPlanner(const TableBytes& stats, const PlannerOptions& options) : stats_(stats), options_(options) {}

  PhysicalQueryPlan Run(const LogicalPlan& root) {
    OpenPipeline open = Build(root);
    Close(std::move(open), 1, {});
    plan_.Validate();
    return std::move(plan_);
  }

 private:
  uint64_t TableSize(const std::string& table) const {
    const auto it = stats_.find(table);
    return it == stats_.end() ? 0 : it->second;
  }

  int Workers(uint64_t bytes) const {
    return options_.force_workers ? std::max(1, *options_.force_workers) : SizePipeline(bytes, options_.sizing);
  }

  int Close(OpenPipeline open, int partition_count, std::vector<Expr> keys) {
    PhysicalOperator sink;
    sink.kind = PhysOpKind::kExchangeWrite;
    sink.output_schema = open.schema;
    sink.partition_count = partition_count;
    sink.partition_keys = std::move(keys);
    const uint64_t objects = static_cast<uint64_t>(partition_count) * static_cast<uint64_t>(open.fragment_count);
    sink.storage_class = objects > options_.hot_tier_objects ? StorageClass::kHot : StorageClass::kStandard;
    PipelinePlan pipeline;
    pipeline.id = static_cast<int>(plan_.pipelines.size());
    pipeline.operators = std::move(open.operators);
    pipeline.operators.push_back(std::move(sink));
    pipeline.fragment_count = open.fragment_count;
    pipeline.dependencies = std::move(open.dependencies);
    pipeline.source_table = std::move(open.source_table);
    pipeline.input_bytes = open.input_bytes;
    plan_.pipelines.push_back(std::move(pipeline));
    return plan_.pipelines.back().id;
  }

  OpenPipeline ReadFrom(int producer, int fragment_count) {
    OpenPipeline open;
    PhysicalOperator read;
    read.kind = PhysOpKind::kExchangeRead;
    read.input_pipeline = producer;
    read.output_schema = plan_.pipelines.at(static_cast<size_t>(producer)).Sink().output_schema;
    open.schema = read.output_schema;
    open.operators.push_back(std::move(read));
    open.fragment_count = fragment_count;
    open.dependencies = {producer};
    return open;
  }

  // Gathers a multi-fragment pipeline into a single fragment.
  OpenPipeline Gather(OpenPipeline open) {
    if (open.fragment_count == 1) return open;
    const int producer = Close(std::move(open), 1, {});
    return ReadFrom(producer, 1);
  }

  static void Append(OpenPipeline& open, PhysicalOperator op) {
    open.schema = op.output_schema;
    open.operators.push_back(std::move(op));
  }

  OpenPipeline Build(const LogicalPlan& node) {
    switch (node.kind) {
      case PlanKind::kScan: {
        OpenPipeline open;
        PhysicalOperator scan;
        scan.kind = PhysOpKind::kScan;
        scan.table = node.table;
        scan.columns = node.columns;
        scan.output_schema = node.schema;
        open.source_table = node.table;
        open.input_bytes = TableSize(node.table);
        open.fragment_count = Workers(open.input_bytes);
        Append(open, std::move(scan));
        return open;
      }
      case PlanKind::kOneRow: {
        OpenPipeline open;
        PhysicalOperator one;
        one.kind = PhysOpKind::kOneRow;
        Append(open, std::move(one));
        return open;
      }
      case PlanKind::kFilter: {
        OpenPipeline open = Build(node.child());
        if (open.operators.size() == 1 && open.operators.front().kind == PhysOpKind::kScan) {
          auto& scan = open.operators.front();
          scan.prune_predicates = PrunePredicatesOf(*node.predicate, scan.columns);
        }
        PhysicalOperator filter;
        filter.kind = PhysOpKind::kFilter;
        filter.predicate = node.predicate;
        filter.output_schema = node.schema;
        Append(open, std::move(filter));
        return open;
      }
      case PlanKind::kProject: {
        OpenPipeline open = Build(node.child());
        PhysicalOperator project;
        project.kind = PhysOpKind::kProject;
        project.projections = node.projections;
        project.output_schema = node.schema;
        Append(open, std::move(project));
        return open;
      }
      case PlanKind::kAggregate:
        return BuildAggregate(node);
      case PlanKind::kJoin:
        return BuildJoin(node);
      case PlanKind::kSort: {
        OpenPipeline open = Gather(Build(node.child()));
        PhysicalOperator sort;
        sort.kind = PhysOpKind::kSort;
        sort.sort_keys = node.sort_keys;
        sort.output_schema = node.schema;
        Append(open, std::move(sort));
        return open;
      }
      case PlanKind::kLimit: {
        OpenPipeline open = Build(node.child());
        PhysicalOperator limit;
        limit.kind = PhysOpKind::kLimit;
        limit.limit = node.limit;
        limit.output_schema = node.schema;
        if (open.fragment_count > 1) {
          // Each fragment keeps its first n rows; the gathered fragment applies the limit again.
          Append(open, limit);
          open = Gather(std::move(open));
        }
        Append(open, std::move(limit));
        return open;
      }
    }
    Fail(ErrorCode::kInternal, "unknown logical operator");
  }

  OpenPipeline BuildAggregate(const LogicalPlan& node) {
    OpenPipeline open = Build(node.child());
    PhysicalOperator partial;
    partial.kind = PhysOpKind::kHashAggregate;
    partial.phase = AggPhase::kPartial;
    partial.group_keys = node.group_keys;
    partial.aggregates = node.aggregates;
    std::vector<Field> partial_fields;
    std::vector<Expr> key_refs;
    std::vector<NamedExpr> final_keys;
    for (const auto& key : node.group_keys) {
      partial_fields.push_back({key.name, key.expr.type, key.expr.nullable});
      key_refs.push_back(Expr::Column(key.name, key.expr.type, key.expr.nullable));
      final_keys.push_back({key_refs.back(), key.name});
    }
    for (const auto& call : node.aggregates) {
      for (auto& field : PartialStateFields(call)) partial_fields.push_back(std::move(field));
    }
    partial.output_schema = Schema(std::move(partial_fields));
    Append(open, std::move(partial));
    const int producer = Close(std::move(open), 1, key_refs);

    OpenPipeline final_open = ReadFrom(producer, 1);
    PhysicalOperator final_agg;
    final_agg.kind = PhysOpKind::kHashAggregate;
    final_agg.phase = AggPhase::kFinal;
    final_agg.group_keys = std::move(final_keys);
    final_agg.aggregates = node.aggregates;
    final_agg.output_schema = node.schema;
    Append(final_open, std::move(final_agg));
    return final_open;
  }

  OpenPipeline BuildJoin(const LogicalPlan& node) {
    OpenPipeline probe = Build(node.children[0]);
    OpenPipeline build = Build(node.children[1]);
    std::vector<Expr> probe_keys;
    std::vector<Expr> build_keys;
    for (const auto& [left, right] : node.join_keys) {
      const DataType type = KeyType(left.type, right.type);
      probe_keys.push_back(CastTo(left, type));
      build_keys.push_back(CastTo(right, type));
    }
    const uint64_t build_bytes = EstimateBytes(node.children[1], stats_);
    JoinMode mode = build_bytes <= options_.broadcast_budget_bytes / static_cast<uint64_t>(probe.fragment_count)
                        ? JoinMode::kBroadcast
                        : JoinMode::kRepartition;
    if (options_.force_join_mode) mode = *options_.force_join_mode;
    if (probe_keys.empty()) mode = JoinMode::kBroadcast;

    PhysicalOperator join;
    join.kind = PhysOpKind::kHashJoin;
    join.join_mode = mode;
    join.probe_keys = probe_keys;
    join.build_keys = build_keys;
    join.build_schema = build.schema;
    join.output_schema = node.schema;
    if (mode == JoinMode::kBroadcast) {
      join.build_pipeline = Close(std::move(build), 1, {});
      probe.dependencies.push_back(join.build_pipeline);
      Append(probe, std::move(join));
      return probe;
    }
    const int workers = Workers(EstimateBytes(node.children[0], stats_) + build_bytes);
    const int probe_id = Close(std::move(probe), workers, probe_keys);
    join.build_pipeline = Close(std::move(build), workers, build_keys);
    OpenPipeline open = ReadFrom(probe_id, workers);
    open.dependencies.push_back(join.build_pipeline);
    Append(open, std::move(join));
    return open;
  }

  const TableBytes& stats_;
  const PlannerOptions& options_;
  PhysicalQueryPlan plan_;
};

}  // namespace

PhysicalQueryPlan PlanPhysical(const LogicalPlan& plan, const TableBytes& stats, const PlannerOptions& options) {
  return PhysicalPlanner(stats, options).Run(plan);
}

}  // namespace skylite
