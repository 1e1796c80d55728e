#include "skylite/optimizer/physical_plan.hpp"

#include <sstream>

#include "skylite/common/errors.hpp"
#include "skylite/storage/catalog.hpp"

namespace skylite {

namespace {

using nlohmann::json;

json NamedToJson(const std::vector<NamedExpr>& items) {
  json array = json::array();
  for (const auto& item : items) array.push_back({{"name", item.name}, {"expr", ExprToJson(item.expr)}});
  return array;
}

std::vector<NamedExpr> NamedFromJson(const json& array) {
  std::vector<NamedExpr> items;
  for (const auto& item : array) items.push_back({ExprFromJson(item.at("expr")), item.at("name").get<std::string>()});
  return items;
}

json ExprsToJson(const std::vector<Expr>& exprs) {
  json array = json::array();
  for (const auto& expr : exprs) array.push_back(ExprToJson(expr));
  return array;
}

std::vector<Expr> ExprsFromJson(const json& array) {
  std::vector<Expr> exprs;
  for (const auto& item : array) exprs.push_back(ExprFromJson(item));
  return exprs;
}

std::string JoinNames(const std::vector<std::string>& names) {
  std::string result;
  for (const auto& name : names) result += (result.empty() ? "" : ", ") + name;
  return result;
}

}  // namespace

std::string_view PhysOpKindName(PhysOpKind kind) {
  switch (kind) {
    case PhysOpKind::kScan:
      return "Scan";
    case PhysOpKind::kOneRow:
      return "OneRow";
    case PhysOpKind::kExchangeRead:
      return "ExchangeRead";
    case PhysOpKind::kFilter:
      return "Filter";
    case PhysOpKind::kProject:
      return "Project";
    case PhysOpKind::kHashAggregate:
      return "HashAggregate";
    case PhysOpKind::kHashJoin:
      return "HashJoin";
    case PhysOpKind::kSort:
      return "Sort";
    case PhysOpKind::kLimit:
      return "Limit";
    case PhysOpKind::kExchangeWrite:
      return "ExchangeWrite";
  }
  return "?";
}

std::vector<Field> PartialStateFields(const AggregateCall& call) {
  switch (call.func) {
    case AggFunc::kCount:
    case AggFunc::kCountStar:
      return {{call.name, DataType::Int64(), false}};
    case AggFunc::kAvg: {
      const auto& input = call.arg->type;
      const DataType sum_type = input.id == TypeId::kDecimal ? DataType::Decimal(kMaxDecimalPrecision, input.scale)
                                                             : input;
      return {{call.name + "#sum", sum_type, true}, {call.name + "#count", DataType::Int64(), false}};
    }
    default:
      return {{call.name, call.type, true}};
  }
}

json ExprToJson(const Expr& expr) {
  json out = {{"k", static_cast<int>(expr.kind)}, {"t", expr.type.ToString()}, {"n", expr.nullable}};
  switch (expr.kind) {
    case ExprKind::kColumn:
      out["c"] = expr.column;
      break;
    case ExprKind::kLiteral:
      out["v"] = expr.literal.ToJson();
      break;
    case ExprKind::kArith:
      out["op"] = static_cast<int>(expr.arith);
      break;
    case ExprKind::kCompare:
      out["op"] = static_cast<int>(expr.compare);
      break;
    default:
      break;
  }
  if (expr.negated) out["neg"] = true;
  if (expr.has_else) out["else"] = true;
  if (!expr.children.empty()) out["ch"] = ExprsToJson(expr.children);
  return out;
}

Expr ExprFromJson(const json& json_expr) {
  Expr expr;
  const int kind = json_expr.at("k").get<int>();
  if (kind < 0 || kind > static_cast<int>(ExprKind::kCast)) Fail(ErrorCode::kInvalidArgument, "bad expression kind");
  expr.kind = static_cast<ExprKind>(kind);
  expr.type = DataType::Parse(json_expr.at("t").get<std::string>());
  expr.nullable = json_expr.at("n").get<bool>();
  if (json_expr.contains("c")) expr.column = json_expr["c"].get<std::string>();
  if (json_expr.contains("v")) expr.literal = Value::FromJson(json_expr["v"]);
  if (expr.kind == ExprKind::kArith) expr.arith = static_cast<ArithOp>(json_expr.at("op").get<int>());
  if (expr.kind == ExprKind::kCompare) expr.compare = static_cast<CompareOp>(json_expr.at("op").get<int>());
  expr.negated = json_expr.value("neg", false);
  expr.has_else = json_expr.value("else", false);
  if (json_expr.contains("ch")) expr.children = ExprsFromJson(json_expr["ch"]);
  return expr;
}

json AggregateToJson(const AggregateCall& call) {
  json out = {{"func", static_cast<int>(call.func)},
              {"name", call.name},
              {"type", call.type.ToString()},
              {"nullable", call.nullable}};
  if (call.arg) out["arg"] = ExprToJson(*call.arg);
  return out;
}

AggregateCall AggregateFromJson(const json& json_call) {
  AggregateCall call;
  call.func = static_cast<AggFunc>(json_call.at("func").get<int>());
  call.name = json_call.at("name").get<std::string>();
  call.type = DataType::Parse(json_call.at("type").get<std::string>());
  call.nullable = json_call.at("nullable").get<bool>();
  if (json_call.contains("arg")) call.arg = ExprFromJson(json_call["arg"]);
  return call;
}

std::string PhysicalOperator::ToString() const {
  std::ostringstream out;
  out << PhysOpKindName(kind);
  switch (kind) {
    case PhysOpKind::kScan:
      out << " " << table << " [" << JoinNames(columns) << "]";
      if (!prune_predicates.empty()) out << " prune=" << prune_predicates.size();
      break;
    case PhysOpKind::kExchangeRead:
      out << " from p" << input_pipeline;
      break;
    case PhysOpKind::kFilter:
      out << " " << predicate->ToString();
      break;
    case PhysOpKind::kProject: {
      std::vector<std::string> items;
      for (const auto& projection : projections) items.push_back(projection.expr.ToString() + " as " + projection.name);
      out << " " << JoinNames(items);
      break;
    }
    case PhysOpKind::kHashAggregate: {
      out << (phase == AggPhase::kPartial ? "(partial)" : "(final)");
      std::vector<std::string> keys;
      for (const auto& key : group_keys) keys.push_back(key.name);
      std::vector<std::string> calls;
      for (const auto& call : aggregates) calls.push_back(call.ToString() + " as " + call.name);
      out << " keys=[" << JoinNames(keys) << "] aggs=[" << JoinNames(calls) << "]";
      break;
    }
    case PhysOpKind::kHashJoin: {
      out << (join_mode == JoinMode::kBroadcast ? "(broadcast)" : "(repartition)") << " build=p" << build_pipeline;
      std::vector<std::string> keys;
      for (size_t i = 0; i < probe_keys.size(); ++i) {
        keys.push_back(probe_keys[i].ToString() + " = " + build_keys[i].ToString());
      }
      out << " on [" << JoinNames(keys) << "]";
      break;
    }
    case PhysOpKind::kSort: {
      std::vector<std::string> keys;
      for (const auto& key : sort_keys) keys.push_back(key.expr.ToString() + (key.descending ? " desc" : ""));
      out << " " << JoinNames(keys);
      break;
    }
    case PhysOpKind::kLimit:
      out << " " << limit;
      break;
    case PhysOpKind::kExchangeWrite: {
      std::vector<std::string> keys;
      for (const auto& key : partition_keys) keys.push_back(key.ToString());
      out << " partitions=" << partition_count << " keys=[" << JoinNames(keys) << "] class="
          << StorageClassName(storage_class);
      break;
    }
    case PhysOpKind::kOneRow:
      break;
  }
  return out.str();
}

json PhysicalOperator::ToJson() const {
  json out = {{"kind", std::string(PhysOpKindName(kind))}, {"schema", SchemaToJson(output_schema)}};
  switch (kind) {
    case PhysOpKind::kScan: {
      out["table"] = table;
      out["columns"] = columns;
      json prune = json::array();
      for (const auto& predicate : prune_predicates) {
        prune.push_back(
            {{"column", predicate.column}, {"op", static_cast<int>(predicate.op)}, {"literal", predicate.literal.ToJson()}});
      }
      out["prune"] = prune;
      break;
    }
    case PhysOpKind::kExchangeRead:
      out["input_pipeline"] = input_pipeline;
      break;
    case PhysOpKind::kFilter:
      out["predicate"] = ExprToJson(*predicate);
      break;
    case PhysOpKind::kProject:
      out["projections"] = NamedToJson(projections);
      break;
    case PhysOpKind::kHashAggregate: {
      out["phase"] = phase == AggPhase::kPartial ? "partial" : "final";
      out["keys"] = NamedToJson(group_keys);
      json calls = json::array();
      for (const auto& call : aggregates) calls.push_back(AggregateToJson(call));
      out["aggregates"] = calls;
      break;
    }
    case PhysOpKind::kHashJoin:
      out["mode"] = join_mode == JoinMode::kBroadcast ? "broadcast" : "repartition";
      out["build_pipeline"] = build_pipeline;
      out["probe_keys"] = ExprsToJson(probe_keys);
      out["build_keys"] = ExprsToJson(build_keys);
      out["build_schema"] = SchemaToJson(build_schema);
      break;
    case PhysOpKind::kSort: {
      json keys = json::array();
      for (const auto& key : sort_keys) keys.push_back({{"expr", ExprToJson(key.expr)}, {"desc", key.descending}});
      out["keys"] = keys;
      break;
    }
    case PhysOpKind::kLimit:
      out["limit"] = limit;
      break;
    case PhysOpKind::kExchangeWrite:
      out["partition_count"] = partition_count;
      out["keys"] = ExprsToJson(partition_keys);
      out["class"] = std::string(StorageClassName(storage_class));
      break;
    case PhysOpKind::kOneRow:
      break;
  }
  return out;
}

PhysicalOperator PhysicalOperator::FromJson(const json& json_op) {
  PhysicalOperator op;
  const auto name = json_op.at("kind").get<std::string>();
  bool known = false;
  for (int i = 0; i <= static_cast<int>(PhysOpKind::kExchangeWrite); ++i) {
    if (PhysOpKindName(static_cast<PhysOpKind>(i)) == name) {
      op.kind = static_cast<PhysOpKind>(i);
      known = true;
    }
  }
  if (!known) Fail(ErrorCode::kInvalidArgument, "unknown operator '" + name + "'");
  op.output_schema = SchemaFromJson(json_op.at("schema"));
  switch (op.kind) {
    case PhysOpKind::kScan:
      op.table = json_op.at("table").get<std::string>();
      op.columns = json_op.at("columns").get<std::vector<std::string>>();
      for (const auto& predicate : json_op.at("prune")) {
        op.prune_predicates.push_back({predicate.at("column").get<std::string>(),
                                       static_cast<PruneOp>(predicate.at("op").get<int>()),
                                       Value::FromJson(predicate.at("literal"))});
      }
      break;
    case PhysOpKind::kExchangeRead:
      op.input_pipeline = json_op.at("input_pipeline").get<int>();
      break;
    case PhysOpKind::kFilter:
      op.predicate = ExprFromJson(json_op.at("predicate"));
      break;
    case PhysOpKind::kProject:
      op.projections = NamedFromJson(json_op.at("projections"));
      break;
    case PhysOpKind::kHashAggregate:
      op.phase = json_op.at("phase").get<std::string>() == "partial" ? AggPhase::kPartial : AggPhase::kFinal;
      op.group_keys = NamedFromJson(json_op.at("keys"));
      for (const auto& call : json_op.at("aggregates")) op.aggregates.push_back(AggregateFromJson(call));
      break;
    case PhysOpKind::kHashJoin:
      op.join_mode = json_op.at("mode").get<std::string>() == "broadcast" ? JoinMode::kBroadcast : JoinMode::kRepartition;
      op.build_pipeline = json_op.at("build_pipeline").get<int>();
      op.probe_keys = ExprsFromJson(json_op.at("probe_keys"));
      op.build_keys = ExprsFromJson(json_op.at("build_keys"));
      op.build_schema = SchemaFromJson(json_op.at("build_schema"));
      break;
    case PhysOpKind::kSort:
      for (const auto& key : json_op.at("keys")) {
        op.sort_keys.push_back({ExprFromJson(key.at("expr")), key.at("desc").get<bool>()});
      }
      break;
    case PhysOpKind::kLimit:
      op.limit = json_op.at("limit").get<int64_t>();
      break;
    case PhysOpKind::kExchangeWrite:
      op.partition_count = json_op.at("partition_count").get<int>();
      op.partition_keys = ExprsFromJson(json_op.at("keys"));
      op.storage_class = ParseStorageClass(json_op.at("class").get<std::string>());
      break;
    case PhysOpKind::kOneRow:
      break;
  }
  return op;
}

json PipelinePlan::ToJson() const {
  json ops = json::array();
  for (const auto& op : operators) ops.push_back(op.ToJson());
  return {{"id", id},
          {"operators", ops},
          {"fragment_count", fragment_count},
          {"dependencies", dependencies},
          {"source_table", source_table},
          {"input_bytes", input_bytes}};
}

PipelinePlan PipelinePlan::FromJson(const json& json_pipeline) {
  PipelinePlan pipeline;
  pipeline.id = json_pipeline.at("id").get<int>();
  for (const auto& op : json_pipeline.at("operators")) pipeline.operators.push_back(PhysicalOperator::FromJson(op));
  pipeline.fragment_count = json_pipeline.at("fragment_count").get<int>();
  pipeline.dependencies = json_pipeline.at("dependencies").get<std::vector<int>>();
  pipeline.source_table = json_pipeline.at("source_table").get<std::string>();
  pipeline.input_bytes = json_pipeline.at("input_bytes").get<uint64_t>();
  return pipeline;
}

void PhysicalQueryPlan::Validate() const {
  Assert(!pipelines.empty(), "physical plan without pipelines");
  std::vector<int> consumers(pipelines.size(), 0);
  for (size_t i = 0; i < pipelines.size(); ++i) {
    const auto& pipeline = pipelines[i];
    Assert(pipeline.id == static_cast<int>(i), "pipeline ids must be positions");
    Assert(pipeline.fragment_count >= 1, "pipeline with no fragments");
    Assert(pipeline.operators.size() >= 2, "pipeline needs a source and a sink");
    const auto source = pipeline.Source().kind;
    Assert(source == PhysOpKind::kScan || source == PhysOpKind::kOneRow || source == PhysOpKind::kExchangeRead,
           "pipeline must start with a source");
    Assert(pipeline.Sink().kind == PhysOpKind::kExchangeWrite, "pipeline must end with an exchange write");
    for (int dependency : pipeline.dependencies) {
      Assert(dependency >= 0 && dependency < pipeline.id, "dependencies must precede their consumer");
      ++consumers[static_cast<size_t>(dependency)];
    }
    for (const auto& op : pipeline.operators) {
      int input = op.kind == PhysOpKind::kExchangeRead ? op.input_pipeline
                  : op.kind == PhysOpKind::kHashJoin   ? op.build_pipeline
                                                       : -1;
      if (input < 0) continue;
      Assert(std::find(pipeline.dependencies.begin(), pipeline.dependencies.end(), input) !=
                 pipeline.dependencies.end(),
             "exchange input not declared as dependency");
      const auto& producer = pipelines.at(static_cast<size_t>(input)).Sink();
      const bool broadcast = op.kind == PhysOpKind::kHashJoin && op.join_mode == JoinMode::kBroadcast;
      Assert(broadcast ? producer.partition_count == 1 : producer.partition_count == pipeline.fragment_count,
             "producer partition count must match the consumer's fragment count");
    }
  }
  for (size_t i = 0; i + 1 < pipelines.size(); ++i) Assert(consumers[i] == 1, "every non-sink pipeline has one consumer");
  Assert(consumers.back() == 0, "the sink pipeline has no consumer");
}

std::string PhysicalQueryPlan::Explain() const {
  std::ostringstream out;
  for (const auto& pipeline : pipelines) {
    out << "pipeline " << pipeline.id << " (W=" << pipeline.fragment_count;
    if (!pipeline.dependencies.empty()) {
      out << ", after";
      for (int dependency : pipeline.dependencies) out << " p" << dependency;
    }
    out << ")\n";
    for (const auto& op : pipeline.operators) out << "  " << op.ToString() << "\n";
  }
  return out.str();
}

json PhysicalQueryPlan::ToJson() const {
  json array = json::array();
  for (const auto& pipeline : pipelines) array.push_back(pipeline.ToJson());
  return {{"pipelines", array}};
}

PhysicalQueryPlan PhysicalQueryPlan::FromJson(const json& json_plan) {
  PhysicalQueryPlan plan;
  for (const auto& pipeline : json_plan.at("pipelines")) plan.pipelines.push_back(PipelinePlan::FromJson(pipeline));
  return plan;
}

}  // namespace skylite
