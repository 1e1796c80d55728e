#include <functional>
#include <set>

#include <gtest/gtest.h>

#include "skylite/bench/datagen.hpp"
#include "skylite/bench/tpch_queries.hpp"
#include "skylite/common/errors.hpp"
#include "skylite/optimizer/cache_key.hpp"
#include "skylite/optimizer/fragment_spec.hpp"
#include "skylite/optimizer/logical_optimizer.hpp"
#include "skylite/optimizer/physical_planner.hpp"
#include "skylite/optimizer/sizing.hpp"
#include "skylite/sql/binder.hpp"

namespace skylite {
namespace {

Catalog TpchCatalog(uint64_t version = 1) {
  Catalog catalog;
  catalog.Put({"lineitem", LineitemSchema(), {}, version});
  catalog.Put({"orders", OrdersSchema(), {}, version});
  return catalog;
}

// Stored bytes of the tables at scale factor 1,000.
const TableBytes kLargeStats = {{"lineitem", 190479910502ULL}, {"orders", 42000000000ULL}};
const TableBytes kSmallStats = {{"lineitem", 2000000}, {"orders", 400000}};

LogicalPlan Optimized(const std::string& sql, const TableBytes& stats = kSmallStats, uint64_t version = 1) {
  return OptimizeLogical(BindSql(sql, TpchCatalog(version)), stats);
}

const LogicalPlan* FindScan(const LogicalPlan& plan, const std::string& table) {
  if (plan.kind == PlanKind::kScan && plan.table == table) return &plan;
  for (const auto& child : plan.children) {
    if (const auto* found = FindScan(child, table)) return found;
  }
  return nullptr;
}

const LogicalPlan* FindKind(const LogicalPlan& plan, PlanKind kind) {
  if (plan.kind == kind) return &plan;
  for (const auto& child : plan.children) {
    if (const auto* found = FindKind(child, kind)) return found;
  }
  return nullptr;
}

TEST(ConstantFolding, FoldsArithmeticAndBooleans) {
  const LogicalPlan plan = BindSql("select 1 + 2 as x", Catalog());
  const Expr folded = FoldConstants(plan.projections[0].expr);
  EXPECT_EQ(folded.kind, ExprKind::kLiteral);
  EXPECT_EQ(folded.literal, Value::Int64(3));
}

TEST(Pushdown, SingleSidePredicateMovesBelowJoin) {
  const LogicalPlan plan =
      Optimized("select o_orderpriority from orders, lineitem where o_orderkey = l_orderkey and l_quantity > 5");
  const LogicalPlan* join = FindKind(plan, PlanKind::kJoin);
  ASSERT_NE(join, nullptr);
  EXPECT_EQ(join->join_keys.size(), 1u);
  bool filter_below = false;
  for (const auto& child : join->children) {
    if (child.kind == PlanKind::kFilter && FindScan(child, "lineitem")) filter_below = true;
  }
  EXPECT_TRUE(filter_below);
}

TEST(Pruning, Q12ScansOnlyNeededOrdersColumns) {
  const LogicalPlan plan = Optimized(TpchQuery(12));
  const LogicalPlan* orders = FindScan(plan, "orders");
  ASSERT_NE(orders, nullptr);
  EXPECT_EQ(std::set<std::string>(orders->columns.begin(), orders->columns.end()),
            (std::set<std::string>{"o_orderkey", "o_orderpriority"}));
}

TEST(Pruning, Q6ScansFourColumns) {
  const LogicalPlan plan = Optimized(TpchQuery(6));
  const LogicalPlan* scan = FindScan(plan, "lineitem");
  ASSERT_NE(scan, nullptr);
  EXPECT_EQ(scan->columns.size(), 4u);
}

TEST(Optimizer, FixpointAndSchemaPreserved) {
  for (int q : {1, 6, 12}) {
    const LogicalPlan bound = BindSql(TpchQuery(q), TpchCatalog());
    const LogicalPlan once = OptimizeLogical(bound, kSmallStats);
    EXPECT_EQ(OptimizeLogical(once, kSmallStats), once);
    EXPECT_EQ(once.schema, bound.schema);
  }
}

TEST(Optimizer, SmallerSideBecomesBuildSide) {
  const LogicalPlan plan = Optimized(TpchQuery(12));
  const LogicalPlan* join = FindKind(plan, PlanKind::kJoin);
  ASSERT_NE(join, nullptr);
  EXPECT_GE(EstimateBytes(join->children[0], kSmallStats), EstimateBytes(join->children[1], kSmallStats));
}

TEST(CacheKey, StableAcrossRunsAndPhysicalChoices) {
  const std::string a = ResultCacheKey(Optimized(TpchQuery(6)));
  const std::string b = ResultCacheKey(Optimized(TpchQuery(6)));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 64u);
  // Statistics steer only physical choices in single-table plans; the key is derived from the logical plan alone.
  EXPECT_EQ(ResultCacheKey(Optimized(TpchQuery(6), kLargeStats)), a);
  EXPECT_NE(ResultCacheKey(Optimized(TpchQuery(1))), a);
}

TEST(CacheKey, ManifestVersionChangesKey) {
  EXPECT_NE(ResultCacheKey(Optimized(TpchQuery(6), kSmallStats, 1)),
            ResultCacheKey(Optimized(TpchQuery(6), kSmallStats, 2)));
}

TEST(CacheKey, ConjunctOrderDoesNotMatter) {
  EXPECT_EQ(ResultCacheKey(Optimized("select l_orderkey from lineitem where l_quantity > 1 and l_tax < 0.05")),
            ResultCacheKey(Optimized("select l_orderkey from lineitem where l_tax < 0.05 and l_quantity > 1")));
}

TEST(Sizing, Formula) {
  const SizingModel model;
  EXPECT_EQ(model.BytesPerFragment(), 787500000u);
  EXPECT_EQ(SizePipeline(0, model), 1);
  EXPECT_EQ(SizePipeline(190479910502ULL, model), 242);
  EXPECT_EQ(SizePipeline(10ULL * 1024 * kGiB * 1024, model), 2500);
  SizingModel small = model;
  small.target_seconds = 0.0;
  EXPECT_EQ(small.BytesPerFragment(), 32 * kMiB);
}

TEST(Sizing, Monotone) {
  const SizingModel model;
  int previous = 0;
  for (uint64_t bytes = 0; bytes < 4000000000ULL; bytes += 37000001ULL) {
    const int w = SizePipeline(bytes, model);
    EXPECT_GE(w, previous);
    previous = w;
  }
}

void ExpectWellFormed(const PhysicalQueryPlan& plan) {
  EXPECT_NO_THROW(plan.Validate());
  for (const auto& pipeline : plan.pipelines) {
    EXPECT_EQ(pipeline.Sink().kind, PhysOpKind::kExchangeWrite);
    for (int dep : pipeline.dependencies) EXPECT_LT(dep, pipeline.id);
    if (pipeline.Source().kind == PhysOpKind::kExchangeRead) {
      const auto& producer = plan.Pipeline(pipeline.Source().input_pipeline);
      const int partitions = producer.Sink().partition_count;
      EXPECT_TRUE(partitions == 1 || partitions == pipeline.fragment_count);
    }
  }
  EXPECT_EQ(plan.Pipeline(plan.SinkId()).fragment_count, 1);
}

TEST(PhysicalPlan, Q6IsTwoPipelines) {
  const auto plan = PlanPhysical(Optimized(TpchQuery(6), kLargeStats), kLargeStats);
  ASSERT_EQ(plan.pipelines.size(), 2u);
  EXPECT_EQ(plan.pipelines[0].fragment_count, 242);
  EXPECT_EQ(plan.pipelines[0].Source().kind, PhysOpKind::kScan);
  EXPECT_EQ(plan.pipelines[0].operators[plan.pipelines[0].operators.size() - 2].kind, PhysOpKind::kHashAggregate);
  EXPECT_EQ(plan.pipelines[1].fragment_count, 1);
  ExpectWellFormed(plan);
}

TEST(PhysicalPlan, Q12AtLargeScaleIsFourPipelines) {
  const auto plan = PlanPhysical(Optimized(TpchQuery(12), kLargeStats), kLargeStats);
  ASSERT_EQ(plan.pipelines.size(), 4u);
  EXPECT_EQ(plan.pipelines[0].Source().kind, PhysOpKind::kScan);
  EXPECT_EQ(plan.pipelines[1].Source().kind, PhysOpKind::kScan);
  EXPECT_EQ(plan.pipelines[2].dependencies.size(), 2u);
  EXPECT_EQ(plan.pipelines[3].fragment_count, 1);
  ExpectWellFormed(plan);
}

TEST(PhysicalPlan, Q12AtDeskScaleBroadcasts) {
  const auto plan = PlanPhysical(Optimized(TpchQuery(12)), kSmallStats);
  EXPECT_EQ(plan.pipelines.size(), 3u);
  ExpectWellFormed(plan);
  PlannerOptions forced;
  forced.force_join_mode = JoinMode::kRepartition;
  forced.force_workers = 3;
  const auto repartitioned = PlanPhysical(Optimized(TpchQuery(12)), kSmallStats, forced);
  EXPECT_EQ(repartitioned.pipelines.size(), 4u);
  ExpectWellFormed(repartitioned);
}

TEST(PhysicalPlan, PlainSelectIsOnePipeline) {
  const auto plan = PlanPhysical(Optimized("select l_orderkey from lineitem where l_quantity < 3"), kSmallStats);
  EXPECT_EQ(plan.pipelines.size(), 1u);
  EXPECT_FALSE(plan.pipelines[0].operators[0].prune_predicates.empty());
  ExpectWellFormed(plan);
}

TEST(PhysicalPlan, JsonRoundtrip) {
  for (int q : {1, 6, 12}) {
    const auto plan = PlanPhysical(Optimized(TpchQuery(q), kLargeStats), kLargeStats);
    EXPECT_EQ(PhysicalQueryPlan::FromJson(plan.ToJson()), plan);
  }
}

TEST(Fragmentize, BinPackTrace) {
  EXPECT_EQ(BinPack({8, 7, 3, 2}, 2), (std::vector<std::vector<size_t>>{{0, 3}, {1, 2}}));
}

TableEntry EqualObjects(size_t count, uint64_t groups_per_object) {
  TableEntry table;
  table.name = "t";
  table.schema = Schema({{"a", DataType::Int64(), false}});
  for (size_t i = 0; i < count; ++i) {
    ObjectEntry object;
    object.bucket = "b";
    object.key = "o" + std::to_string(i);
    for (uint64_t g = 0; g < groups_per_object; ++g) {
      object.row_group_bytes.push_back(100);
      object.row_group_rows.push_back(10);
    }
    object.file_bytes = 100 * groups_per_object + 50;
    object.row_count = 10 * groups_per_object;
    table.objects.push_back(object);
  }
  return table;
}

TEST(Fragmentize, EqualObjectsPackEvenly) {
  const auto assignments = FragmentizeScan(EqualObjects(10, 1), 5);
  ASSERT_EQ(assignments.size(), 5u);
  for (const auto& a : assignments) EXPECT_EQ(a.objects.size(), 2u);
}

TEST(Fragmentize, SingleFragmentOwnsEverything) {
  const auto assignments = FragmentizeScan(EqualObjects(3, 4), 1);
  ASSERT_EQ(assignments.size(), 1u);
  EXPECT_EQ(assignments[0].objects.size(), 3u);
}

TEST(Fragmentize, RowGroupSplitCoversEveryGroupOnce) {
  const TableEntry table = EqualObjects(2, 5);
  const auto assignments = FragmentizeScan(table, 4);
  ASSERT_EQ(assignments.size(), 4u);
  std::set<std::pair<std::string, size_t>> seen;
  for (const auto& a : assignments) {
    for (const auto& o : a.objects) {
      for (size_t g : o.row_groups) EXPECT_TRUE(seen.insert({o.key, g}).second);
    }
  }
  EXPECT_EQ(seen.size(), 10u);
  const auto parts = SplitAssignment(assignments[0], table, 2);
  EXPECT_EQ(parts.size(), 2u);
}

TEST(FragmentSpec, SerializationRoundtrip) {
  const auto plan = PlanPhysical(Optimized(TpchQuery(12), kLargeStats), kLargeStats);
  FragmentSpec spec;
  spec.query_id = "q1";
  spec.pipeline_id = 2;
  spec.fragment_id = 5;
  spec.fragment_count = 7;
  spec.operators = plan.pipelines[2].operators;
  spec.exchange_inputs = {{0, {"a", "b"}}, {1, {"c"}}};
  spec.intermediate_bucket = "i";
  spec.response_queue = "r";
  EXPECT_EQ(FragmentSpec::Deserialize(spec.Serialize()), spec);
  EXPECT_THROW(FragmentSpec::Deserialize("{\"nope\": 1}"), SkyliteError);
}

}  // namespace
}  // namespace skylite
