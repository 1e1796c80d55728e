#include <algorithm>
#include <map>
#include <set>

#include <gtest/gtest.h>
#include <json.hpp>

#include "skylite/bench/oracle.hpp"
#include "skylite/bench/result_reader.hpp"
#include "skylite/bench/tpch_queries.hpp"
#include "skylite/common/errors.hpp"
#include "skylite/execution/coordinator.hpp"
#include "skylite/execution/operators.hpp"
#include "skylite/execution/registry.hpp"
#include "skylite/execution/worker.hpp"
#include "skylite/optimizer/logical_optimizer.hpp"
#include "skylite/sql/binder.hpp"
#include "test_util.hpp"

namespace skylite {
namespace {

using testing::KeyValueBatch;
using testing::MakeTpch;
using testing::TpchData;

// --- operators ------------------------------------------------------------------------------------------------

Expr Col(const std::string& name, DataType type) { return Expr::Column(name, type, false); }

TEST(Operators, PartialFinalCountIsAdditive) {
  OperatorContext ctx;
  const std::vector<AggregateCall> calls = {AggregateCall::Make(AggFunc::kCountStar, std::nullopt, "n"),
                                            AggregateCall::Make(AggFunc::kSum, Col("v", DataType::Decimal(15, 2)), "s"),
                                            AggregateCall::Make(AggFunc::kAvg, Col("v", DataType::Decimal(15, 2)), "a")};
  std::vector<Field> partial_fields;
  for (const auto& call : calls) {
    for (auto& f : PartialStateFields(call)) partial_fields.push_back(f);
  }
  const Schema partial_schema(partial_fields);
  std::vector<Field> final_fields;
  for (const auto& call : calls) final_fields.push_back({call.name, call.type, call.nullable});
  const Schema final_schema(final_fields);

  CollectOperator states(ctx, partial_schema);
  for (const auto& part : {KeyValueBatch({1, 2, 3}, {100, 200, 300}), KeyValueBatch({4, 5, 6, 7}, {1, 2, 3, 5})}) {
    HashAggregateOperator partial(ctx, AggPhase::kPartial, {}, calls, partial_schema);
    partial.SetNext(&states);
    partial.Push(part);
    partial.Finish();
  }
  ASSERT_EQ(states.Rows().NumRows(), 2u);
  CollectOperator out(ctx, final_schema);
  HashAggregateOperator final_agg(ctx, AggPhase::kFinal, {}, calls, final_schema);
  final_agg.SetNext(&out);
  final_agg.Push(states.Rows());
  final_agg.Finish();
  ASSERT_EQ(out.Rows().NumRows(), 1u);
  const auto row = out.Rows().Row(0);
  EXPECT_EQ(row[0], Value::Int64(7));
  EXPECT_EQ(row[1].ToString(), "6.11");
  // 6.11 / 7 = 0.872857142..., rounded half to even at six digits.
  EXPECT_EQ(row[2].ToString(), "0.872857");
}

TEST(Operators, EmptyGlobalAggregateYieldsOneRow) {
  OperatorContext ctx;
  const std::vector<AggregateCall> calls = {AggregateCall::Make(AggFunc::kCountStar, std::nullopt, "n"),
                                            AggregateCall::Make(AggFunc::kSum, Col("v", DataType::Decimal(15, 2)), "s")};
  const Schema schema({{"n", DataType::Int64(), false}, {"s", calls[1].type, true}});
  CollectOperator out(ctx, schema);
  HashAggregateOperator final_agg(ctx, AggPhase::kFinal, {}, calls, schema);
  final_agg.SetNext(&out);
  final_agg.Finish();
  ASSERT_EQ(out.Rows().NumRows(), 1u);
  EXPECT_EQ(out.Rows().Row(0)[0], Value::Int64(0));
  EXPECT_TRUE(out.Rows().Row(0)[1].IsNull());
}

TEST(Operators, PartitioningPlacesEveryRowOnce) {
  std::vector<int64_t> keys;
  std::vector<int64_t> values;
  for (int i = 0; i < 1000; ++i) {
    keys.push_back(i * 31 % 97);
    values.push_back(i);
  }
  const RecordBatch batch = KeyValueBatch(keys, values);
  const auto parts = PartitionRows(batch, {Col("k", DataType::Int64())}, 7);
  ASSERT_EQ(parts.size(), batch.NumRows());
  std::map<int64_t, uint32_t> partition_of_key;
  for (size_t i = 0; i < parts.size(); ++i) {
    ASSERT_LT(parts[i], 7u);
    const auto [it, inserted] = partition_of_key.emplace(keys[i], parts[i]);
    EXPECT_EQ(it->second, parts[i]);
  }
}

TEST(Operators, HashJoinMatchesNestedLoop) {
  OperatorContext ctx;
  const RecordBatch probe = KeyValueBatch({1, 2, 2, 3, 5}, {10, 20, 21, 30, 50});
  const RecordBatch build = KeyValueBatch({2, 3, 3, 4}, {200, 300, 301, 400});
  Schema output({{"k", DataType::Int64(), false},
                 {"v", DataType::Decimal(15, 2), false},
                 {"k2", DataType::Int64(), false},
                 {"v2", DataType::Decimal(15, 2), false}});
  CollectOperator out(ctx, output);
  HashJoinOperator join(ctx, {Col("k", DataType::Int64())}, {Col("k", DataType::Int64())}, build.GetSchema(), output);
  join.SetNext(&out);
  join.PushBuild(build);
  join.FinishBuild();
  join.Push(probe);
  join.Finish();
  EXPECT_EQ(out.Rows().NumRows(), 4u);
  for (size_t r = 0; r < out.Rows().NumRows(); ++r) EXPECT_EQ(out.Rows().Row(r)[0], out.Rows().Row(r)[2]);
}

TEST(Operators, SortPlacesNullsLastAscending) {
  OperatorContext ctx;
  const Schema schema({{"x", DataType::Int64(), true}});
  RecordBatch batch(schema);
  for (auto v : {Value::Int64(3), Value::Null(DataType::Int64()), Value::Int64(1)}) batch.AppendRow({v});
  CollectOperator out(ctx, schema);
  SortOperator sort(ctx, {{Expr::Column("x", DataType::Int64(), true), false}}, schema);
  sort.SetNext(&out);
  sort.Push(batch);
  sort.Finish();
  EXPECT_EQ(out.Rows().Row(0)[0], Value::Int64(1));
  EXPECT_TRUE(out.Rows().Row(2)[0].IsNull());
  CollectOperator desc_out(ctx, schema);
  SortOperator desc(ctx, {{Expr::Column("x", DataType::Int64(), true), true}}, schema);
  desc.SetNext(&desc_out);
  desc.Push(batch);
  desc.Finish();
  EXPECT_TRUE(desc_out.Rows().Row(0)[0].IsNull());
  EXPECT_EQ(desc_out.Rows().Row(1)[0], Value::Int64(3));
}

TEST(Operators, LimitAndBudget) {
  OperatorContext ctx;
  const RecordBatch batch = KeyValueBatch({1, 2, 3, 4}, {1, 2, 3, 4});
  CollectOperator out(ctx, batch.GetSchema());
  LimitOperator limit(ctx, 3);
  limit.SetNext(&out);
  limit.Push(batch);
  limit.Push(batch);
  EXPECT_EQ(out.Rows().NumRows(), 3u);

  OperatorContext tight;
  tight.memory_budget_bytes = 16;
  SortOperator sort(tight, {{Col("k", DataType::Int64()), false}}, batch.GetSchema());
  try {
    sort.Push(batch);
    sort.Finish();
    FAIL() << "expected OutOfBudget";
  } catch (const SkyliteError& error) {
    EXPECT_EQ(error.Code(), ErrorCode::kOutOfBudget);
  }
}

// --- shared data ----------------------------------------------------------------------------------------------

const TpchData& Tiny() {
  static const TpchData data = MakeTpch(0.001, 2048);
  return data;
}

RecordBatch Oracle(const TpchData& data, const std::string& sql) { return OracleQuery(sql, *data.sim, data.catalog); }

void ExpectOracleEqual(const TpchData& data, Simulator& sim, const QueryResult& result, const std::string& sql) {
  const RecordBatch expected = Oracle(data, sql);
  const RecordBatch actual = FetchResult(sim, result);
  const auto comparison = CompareResults(expected, actual, true);
  EXPECT_TRUE(comparison.equal) << comparison.detail;
}

std::vector<InvocationRecord> Workers(const Simulator& sim, const QueryResult& result) {
  std::vector<InvocationRecord> out;
  for (const auto& record : sim.Invocations(result.query_id)) {
    if (record.function == kWorkerFunctionName) out.push_back(record);
  }
  return out;
}

// --- worker ---------------------------------------------------------------------------------------------------

FragmentSpec ScanFilterFragment(const TpchData& data, const std::string& sql) {
  const LogicalPlan plan = OptimizeLogical(BindSql(sql, data.catalog));
  const auto physical = PlanPhysical(plan, {});
  FragmentSpec spec;
  spec.query_id = "wq";
  spec.operators = physical.pipelines.at(0).operators;
  spec.scan = FragmentizeScan(data.catalog.Resolve("lineitem"), 1).at(0);
  spec.intermediate_bucket = "inter";
  spec.response_queue = "responses";
  return spec;
}

WorkerResponse RunWorker(Simulator& sim, const std::string& payload) {
  sim.Invoke(WorkerFunction(2048), payload, WorkerMain, {std::nullopt, kNoInvocation, "wq", ""});
  sim.RunUntilIdle();
  const auto messages = sim.ReceiveMessages({sim.Now() + Seconds(10), "wq"}, "responses", 10);
  EXPECT_EQ(messages.size(), 1u);
  return messages.empty() ? WorkerResponse{} : WorkerResponse::Deserialize(messages[0].body);
}

TEST(Worker, ScanFilterFragmentMatchesOracle) {
  const auto& data = Tiny();
  const std::string sql = "select l_orderkey, l_quantity from lineitem where l_quantity < 5";
  auto sim = data.Fork();
  const FragmentSpec spec = ScanFilterFragment(data, sql);
  const WorkerResponse response = RunWorker(*sim, FragmentPayload(spec));
  ASSERT_TRUE(response.Ok()) << response.error;
  ASSERT_EQ(response.output_keys.size(), 1u);
  const auto object = sim->PeekObject("inter", response.output_keys[0]);
  ASSERT_TRUE(object.has_value());
  RecordBatch actual(spec.operators.back().output_schema);
  for (const auto& batch : ReadColumnarFile(*object->bytes)) AppendBatch(actual, batch);
  const auto comparison = CompareResults(Oracle(data, sql), actual, false);
  EXPECT_TRUE(comparison.equal) << comparison.detail;
}

TEST(Worker, FragmentIsIdempotent) {
  const auto& data = Tiny();
  auto sim = data.Fork();
  const FragmentSpec spec = ScanFilterFragment(data, "select l_orderkey from lineitem where l_tax > 0.05");
  const auto first = RunWorker(*sim, FragmentPayload(spec));
  const std::string bytes = *sim->PeekObject("inter", first.output_keys[0])->bytes;
  const auto second = RunWorker(*sim, FragmentPayload(spec));
  EXPECT_EQ(second.output_keys, first.output_keys);
  EXPECT_EQ(*sim->PeekObject("inter", second.output_keys[0])->bytes, bytes);
}

TEST(Worker, EmptyInputStillWritesObject) {
  const auto& data = Tiny();
  auto sim = data.Fork();
  FragmentSpec spec = ScanFilterFragment(data, "select l_orderkey from lineitem");
  spec.scan = ScanAssignment{};
  const auto response = RunWorker(*sim, FragmentPayload(spec));
  ASSERT_TRUE(response.Ok()) << response.error;
  EXPECT_EQ(response.stats.rows_out, 0u);
  const auto object = sim->PeekObject("inter", response.output_keys.at(0));
  ASSERT_TRUE(object.has_value());
  EXPECT_EQ(ReadFooterFromFile(*object->bytes).TotalRows(), 0u);
}

TEST(Worker, MalformedRequestIsCodeError) {
  Simulator sim;
  const auto response = RunWorker(sim, R"({"fragment": {"response_queue": "responses", "query_id": "wq"}})");
  EXPECT_EQ(response.failure, FailureClass::kCodeError);
}

TEST(Worker, ErrorClassification) {
  EXPECT_EQ(ClassifyError(ErrorCode::kOutOfBudget), FailureClass::kDataSkew);
  EXPECT_EQ(ClassifyError(ErrorCode::kFetchFailed), FailureClass::kTransient);
  EXPECT_EQ(ClassifyError(ErrorCode::kRequestFailed), FailureClass::kTransient);
  EXPECT_EQ(ClassifyError(ErrorCode::kTypeMismatch), FailureClass::kCodeError);
}

TEST(Worker, PayloadFragments) {
  FragmentSpec a;
  a.pipeline_id = 1;
  a.fragment_id = 2;
  FragmentSpec b = a;
  b.fragment_id = 3;
  EXPECT_EQ(PayloadFragments(FragmentPayload(a)), (std::vector<std::pair<int, int>>{{1, 2}}));
  EXPECT_EQ(PayloadFragments(RootPayload({a, b}, "f")), (std::vector<std::pair<int, int>>{{1, 2}, {1, 3}}));
  EXPECT_TRUE(PayloadFragments("garbage").empty());
}

// --- registry -------------------------------------------------------------------------------------------------

TEST(Registry, LookupRequiresLiveObjects) {
  Simulator sim;
  ResultRegistry registry(sim);
  RegistryEntry entry;
  entry.cache_key = "abc";
  entry.bucket = "b";
  entry.fragments = {{"o1"}, {"o2"}};
  sim.PutObject({0, "t"}, "b", "o1", "x");
  sim.PutObject({0, "t"}, "b", "o2", "y");
  registry.Register({0, "t"}, ResultRegistryKey("abc"), entry);
  SimTime latency = 0;
  const auto found = registry.Lookup({0, "t"}, ResultRegistryKey("abc"), &latency);
  ASSERT_TRUE(found.has_value());
  EXPECT_EQ(*found, entry);
  EXPECT_GT(latency, 0);
  EXPECT_EQ(found->OutputKeys(), (std::vector<std::string>{"o1", "o2"}));
  sim.DeleteObject("b", "o2");
  EXPECT_FALSE(registry.Lookup({0, "t"}, ResultRegistryKey("abc"), &latency).has_value());
  EXPECT_EQ(registry.List({0, "t"}).size(), 1u);
  registry.Clear();
  EXPECT_TRUE(registry.List({0, "t"}).empty());
}

TEST(Registry, CheckpointKeysDependOnInputs) {
  const auto a = CheckpointRegistryKey("k", "{}", {"x"});
  EXPECT_EQ(a, CheckpointRegistryKey("k", "{}", {"x"}));
  EXPECT_NE(a, CheckpointRegistryKey("k", "{}", {"y"}));
  EXPECT_NE(a, CheckpointRegistryKey("k2", "{}", {"x"}));
  EXPECT_NE(a, ResultRegistryKey("k"));
}

// --- coordinator ----------------------------------------------------------------------------------------------

TEST(Coordinator, SelectOneProducesOneRow) {
  Simulator sim;
  Coordinator coordinator(sim, Catalog());
  const auto result = coordinator.Run("SELECT 1");
  const auto rows = FetchResult(sim, result);
  ASSERT_EQ(rows.NumRows(), 1u);
  EXPECT_EQ(rows.Row(0)[0], Value::Int64(1));
  EXPECT_EQ(result.Invocations(), 1);
}

TEST(Coordinator, CompileErrorsCostNothing) {
  const auto& data = Tiny();
  auto sim = data.Fork();
  Coordinator coordinator(*sim, data.catalog);
  const double before = sim->TotalCost(CostCategory::kComputeGibSeconds);
  try {
    coordinator.Run("select x from missing_table");
    FAIL();
  } catch (const SkyliteError& error) {
    EXPECT_EQ(error.Code(), ErrorCode::kUnknownTable);
  }
  EXPECT_EQ(sim->TotalCost(CostCategory::kComputeGibSeconds), before);
  EXPECT_TRUE(sim->Invocations().empty());
}

TEST(Coordinator, Q6MatchesOracle) {
  const auto& data = Tiny();
  auto sim = data.Fork();
  Coordinator coordinator(*sim, data.catalog);
  const auto result = coordinator.Run(TpchQuery(6));
  ExpectOracleEqual(data, *sim, result, TpchQuery(6));
  EXPECT_FALSE(result.result_cache_hit);
  EXPECT_EQ(result.stages.size(), 2u);
}

TEST(Coordinator, DirectInvocationBelowThreshold) {
  const auto& data = Tiny();
  auto sim = data.Fork();
  QueryOptions options;
  options.planner.force_workers = 4;
  Coordinator coordinator(*sim, data.catalog, options);
  const auto result = coordinator.Run(TpchQuery(6));
  ASSERT_EQ(result.stages[0].fragments, 4);
  EXPECT_EQ(result.stages[0].roots, 0);
  EXPECT_EQ(result.stages[0].submitted.size(), 4u);
  for (const auto& record : Workers(*sim, result)) EXPECT_EQ(record.parent, kNoInvocation);
  ExpectOracleEqual(data, *sim, result, TpchQuery(6));
}

// Checks a two-level stage from the invocation records: every worker is a root or a root's child.
void ExpectTwoLevel(const Simulator& sim, const QueryResult& result, const StageReport& stage, int w) {
  const int roots = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(w))));
  EXPECT_EQ(stage.roots, roots);
  EXPECT_EQ(static_cast<int>(stage.submitted.size()), roots);
  std::set<InvocationId> root_ids(stage.submitted.begin(), stage.submitted.end());
  int children = 0;
  for (const auto& record : Workers(sim, result)) {
    if (root_ids.count(record.id)) {
      EXPECT_EQ(record.parent, kNoInvocation);
    } else if (root_ids.count(record.parent)) {
      ++children;
    }
  }
  EXPECT_EQ(roots + children, w);
}

TEST(Coordinator, TwoLevelInvocation) {
  const auto& data = Tiny();
  for (int w : {16, 65}) {
    auto sim = data.Fork();
    QueryOptions options;
    options.planner.force_workers = w;
    options.two_level_threshold = 8;
    Coordinator coordinator(*sim, data.catalog, options);
    const auto result = coordinator.Run(TpchQuery(6));
    ExpectTwoLevel(*sim, result, result.stages[0], w);
    EXPECT_EQ(result.stages[0].invocations, w);
    ExpectOracleEqual(data, *sim, result, TpchQuery(6));
  }
}

TEST(Coordinator, ThresholdBoundaryIsDirect) {
  const auto& data = Tiny();
  auto sim = data.Fork();
  QueryOptions options;
  options.planner.force_workers = 64;
  Coordinator coordinator(*sim, data.catalog, options);
  const auto result = coordinator.Run(TpchQuery(6));
  EXPECT_EQ(result.stages[0].roots, 0);
  EXPECT_EQ(result.stages[0].submitted.size(), 64u);
}

TEST(Coordinator, RepeatIsFullCacheHit) {
  const auto& data = Tiny();
  auto sim = data.Fork();
  Coordinator coordinator(*sim, data.catalog);
  const auto cold = coordinator.Run(TpchQuery(12));
  const auto warm = coordinator.Run(TpchQuery(12));
  EXPECT_TRUE(warm.result_cache_hit);
  EXPECT_EQ(warm.Invocations(), 0);
  EXPECT_TRUE(Workers(*sim, warm).empty());
  EXPECT_EQ(ResultObjectBytes(*sim, warm), ResultObjectBytes(*sim, cold));

  QueryOptions no_cache;
  no_cache.use_cache = false;
  Coordinator uncached(*sim, data.catalog, no_cache);
  EXPECT_GT(uncached.Run(TpchQuery(12)).Invocations(), 0);
}

TEST(Coordinator, ForcedStragglersAreRetriggered) {
  const auto& data = Tiny();
  SimConfig config;
  config.faults.straggler_fraction = 0.3;
  config.faults.straggler_slowdown = 10.0;
  config.faults.affect_storage_requests = false;
  int retriggers = 0;
  for (uint64_t seed = 1; seed <= 6; ++seed) {
    config.faults.rng_seed = seed;
    auto sim = data.Fork(config);
    QueryOptions options;
    options.planner.force_workers = 7;
    Coordinator coordinator(*sim, data.catalog, options);
    const auto result = coordinator.Run(TpchQuery(12));
    retriggers += result.Retriggers();
    ExpectOracleEqual(data, *sim, result, TpchQuery(12));
  }
  EXPECT_GT(retriggers, 0);
}

TEST(Coordinator, RacingAttemptsWriteIdenticalObjects) {
  const auto& data = Tiny();
  SimConfig config;
  config.faults.straggler_fraction = 1.0;
  config.faults.straggler_slowdown = 10.0;
  config.faults.affect_storage_requests = false;
  auto sim = data.Fork(config);
  Coordinator coordinator(*sim, data.catalog);
  const auto result = coordinator.Run(TpchQuery(6));
  EXPECT_GT(result.Retriggers(), 0);
  // Every attempt has run to completion; the surviving objects are those of the winning attempt.
  EXPECT_EQ(sim->PendingInvocations(result.query_id), 0u);
  auto clean = data.Fork();
  Coordinator reference(*clean, data.catalog);
  const auto expected = reference.Run(TpchQuery(6));
  EXPECT_EQ(ResultObjectBytes(*sim, result), ResultObjectBytes(*clean, expected));
}

TEST(Coordinator, PersistentCrashesExhaustAttempts) {
  const auto& data = Tiny();
  SimConfig config;
  config.faults.crash_fraction = 1.0;
  config.faults.affect_storage_requests = false;
  auto sim = data.Fork(config);
  Coordinator coordinator(*sim, data.catalog);
  try {
    coordinator.Run(TpchQuery(6));
    FAIL();
  } catch (const SkyliteError& error) {
    EXPECT_EQ(error.Code(), ErrorCode::kQueryAborted);
    EXPECT_NE(std::string(error.what()).find("transient-exhausted"), std::string::npos);
  }
}

TEST(Coordinator, ResumeSkipsCompletedStages) {
  const auto& data = Tiny();
  auto sim = data.Fork();
  QueryOptions options;
  options.use_cache = false;
  options.abort_after_stages = 1;
  Coordinator aborting(*sim, data.catalog, options);
  std::string query_id;
  try {
    aborting.Run(TpchQuery(12));
    FAIL();
  } catch (const SkyliteError& error) {
    EXPECT_EQ(error.Code(), ErrorCode::kQueryAborted);
  }
  for (const auto& [key, value] : sim->KvScan({sim->Now(), "t"}, kQueryTable)) query_id = key;
  ASSERT_FALSE(query_id.empty());
  const size_t before = sim->Invocations(query_id).size();
  const auto resumed = aborting.Resume(query_id);
  ASSERT_FALSE(resumed.stages.empty());
  int hits = 0;
  for (const auto& stage : resumed.stages) hits += stage.cache_hit ? 1 : 0;
  EXPECT_EQ(hits, 1);
  EXPECT_EQ(sim->Invocations(query_id).size() - before, static_cast<size_t>(resumed.Invocations()));
  ExpectOracleEqual(data, *sim, resumed, TpchQuery(12));

  // Resuming a finished query returns the registered result without invoking anything.
  const auto again = aborting.Resume(query_id);
  EXPECT_EQ(again.Invocations(), 0);
  EXPECT_EQ(ResultObjectBytes(*sim, again), ResultObjectBytes(*sim, resumed));
}

TEST(Coordinator, ResumeWithNothingRegisteredRunsEverything) {
  const auto& data = Tiny();
  SimConfig config;
  config.faults.crash_fraction = 1.0;
  config.faults.affect_storage_requests = false;
  auto sim = data.Fork(config);
  Coordinator coordinator(*sim, data.catalog);
  EXPECT_THROW(coordinator.Run(TpchQuery(6)), SkyliteError);
  sim->SetFaults(FaultPlan{});
  std::string query_id;
  for (const auto& [key, value] : sim->KvScan({sim->Now(), "t"}, kQueryTable)) query_id = key;
  const auto resumed = coordinator.Resume(query_id);
  for (const auto& stage : resumed.stages) EXPECT_FALSE(stage.cache_hit);
  ExpectOracleEqual(data, *sim, resumed, TpchQuery(6));
}

TEST(Coordinator, ConcurrentQueries) {
  const auto& data = Tiny();
  auto sim = data.Fork();
  Coordinator coordinator(*sim, data.catalog);
  const auto results = coordinator.RunConcurrent({TpchQuery(1), TpchQuery(6), TpchQuery(12)});
  ASSERT_EQ(results.size(), 3u);
  ExpectOracleEqual(data, *sim, results[0], TpchQuery(1));
  ExpectOracleEqual(data, *sim, results[1], TpchQuery(6));
  ExpectOracleEqual(data, *sim, results[2], TpchQuery(12));
  std::set<std::string> ids;
  for (const auto& r : results) ids.insert(r.query_id);
  EXPECT_EQ(ids.size(), 3u);
}

TEST(Coordinator, NoComputeBilledBetweenQueries) {
  const auto& data = Tiny();
  auto sim = data.Fork();
  Coordinator coordinator(*sim, data.catalog);
  coordinator.Run(TpchQuery(6));
  const double after_first = sim->TotalCost(CostCategory::kComputeGibSeconds);
  sim->AdvanceIdle(Seconds(3600));
  EXPECT_EQ(sim->TotalCost(CostCategory::kComputeGibSeconds), after_first);
}

TEST(Coordinator, HandleRequestEnvelope) {
  const auto& data = Tiny();
  auto sim = data.Fork();
  Coordinator coordinator(*sim, data.catalog);
  const auto location = coordinator.HandleRequest(R"({"query": "select count(*) as n from orders"})");
  EXPECT_TRUE(location.contains("bucket"));
  EXPECT_TRUE(location.contains("keys") || location.contains("result_keys"));
  EXPECT_THROW(coordinator.HandleRequest("{}"), SkyliteError);
}

}  // namespace
}  // namespace skylite
