#include <set>

#include <gtest/gtest.h>

#include "skylite/bench/datagen.hpp"
#include "skylite/bench/oracle.hpp"
#include "skylite/bench/result_reader.hpp"
#include "skylite/bench/run_report.hpp"
#include "skylite/bench/sweep.hpp"
#include "skylite/bench/tpch_queries.hpp"
#include "skylite/common/errors.hpp"
#include "skylite/execution/coordinator.hpp"
#include "test_util.hpp"

namespace skylite {
namespace {

using testing::MakeTpch;
using testing::TpchData;

const TpchData& Small() {
  static const TpchData data = MakeTpch(0.01);
  return data;
}

const TpchData& Tiny() {
  static const TpchData data = MakeTpch(0.001);
  return data;
}

std::vector<std::string> AllBytes(const Simulator& sim, const Catalog& catalog) {
  std::vector<std::string> out;
  for (const auto& name : catalog.TableNames()) {
    for (const auto& object : catalog.Resolve(name).objects) out.push_back(*sim.PeekObject(object.bucket, object.key)->bytes);
  }
  return out;
}

TEST(DataGen, SameSeedSameBytes) {
  const auto a = MakeTpch(0.001);
  const auto b = MakeTpch(0.001);
  EXPECT_EQ(a.catalog.ToJson(), b.catalog.ToJson());
  EXPECT_EQ(AllBytes(*a.sim, a.catalog), AllBytes(*b.sim, b.catalog));
  const auto c = MakeTpch(0.001, 131072, 2);
  EXPECT_NE(AllBytes(*a.sim, a.catalog), AllBytes(*c.sim, c.catalog));
}

TEST(DataGen, RowCountsScale) {
  const auto& data = Small();
  EXPECT_EQ(data.catalog.Resolve("orders").TotalRows(), 15000u);
  EXPECT_EQ(OrdersRowCount(0.01), 15000u);
  EXPECT_EQ(OrdersRowCount(1), 1500000u);
  EXPECT_EQ(OrdersRowCount(0.0000001), 1u);
  // One to seven lines per order, drawn from the seeded generator.
  EXPECT_EQ(data.catalog.Resolve("lineitem").TotalRows(), 59895u);
}

TEST(DataGen, Schemas) {
  EXPECT_EQ(LineitemSchema().Size(), 16u);
  EXPECT_EQ(OrdersSchema().Size(), 9u);
  EXPECT_EQ(LineitemSchema().At(LineitemSchema().IndexOrFail("l_shipdate")).type, DataType::Date());
  EXPECT_EQ(Small().catalog.Resolve("lineitem").schema, LineitemSchema());
}

TEST(DataGen, CatalogMatchesObjects) {
  const auto& data = Small();
  for (const auto& name : data.catalog.TableNames()) {
    const auto& table = data.catalog.Resolve(name);
    EXPECT_EQ(table.version, 1u);
    for (const auto& object : table.objects) {
      const auto stored = data.sim->PeekObject(object.bucket, object.key);
      ASSERT_TRUE(stored.has_value());
      EXPECT_EQ(stored->bytes->size(), object.file_bytes);
      uint64_t rows = 0;
      for (auto r : object.row_group_rows) rows += r;
      EXPECT_EQ(rows, object.row_count);
    }
  }
}

TEST(DataGen, SplitsAtTargetFileSize) {
  Simulator sim;
  DataGenSpec spec;
  spec.scale_factor = 0.01;
  spec.target_file_bytes = kMiB / 2;
  spec.row_group_rows = 4096;
  const Catalog catalog = GenerateTpch(sim, spec);
  const auto& lineitem = catalog.Resolve("lineitem");
  EXPECT_GT(lineitem.objects.size(), 1u);
  EXPECT_EQ(lineitem.TotalRows(), 59895u);
  const Catalog again = GenerateTpch(sim, spec, catalog);
  EXPECT_EQ(again.Resolve("lineitem").version, 2u);
}

TEST(Oracle, Q1GroupsAtTinyScale) {
  const auto& data = Tiny();
  const auto rows = OracleQuery(TpchQuery(1), *data.sim, data.catalog);
  EXPECT_EQ(rows.NumRows(), 4u);
  EXPECT_EQ(rows.Row(0)[0].ToString(), "A");
  EXPECT_EQ(rows.Row(0)[1].ToString(), "F");
}

TEST(Oracle, Q12TwoShipModes) {
  const auto& data = Tiny();
  const auto rows = OracleQuery(TpchQuery(12), *data.sim, data.catalog);
  ASSERT_EQ(rows.NumRows(), 2u);
  EXPECT_EQ(rows.Row(0)[0].ToString(), "MAIL");
  EXPECT_EQ(rows.Row(1)[0].ToString(), "SHIP");
}

TEST(Oracle, Q6OverEmptyTableIsOneNullRow) {
  Simulator sim;
  DataGenSpec spec;
  spec.scale_factor = 0.001;
  Catalog catalog = GenerateTpch(sim, spec);
  TableEntry empty = catalog.Resolve("lineitem");
  empty.objects.clear();
  catalog.Put(empty);
  const auto rows = OracleQuery(TpchQuery(6), sim, catalog);
  ASSERT_EQ(rows.NumRows(), 1u);
  EXPECT_TRUE(rows.Row(0)[0].IsNull());

  Coordinator coordinator(sim, catalog);
  const auto result = coordinator.Run(TpchQuery(6));
  const auto comparison = CompareResults(rows, FetchResult(sim, result), true);
  EXPECT_TRUE(comparison.equal) << comparison.detail;
}

TEST(Oracle, EngineMatchesAtSmallScale) {
  const auto& data = Small();
  for (int q : {1, 6, 12}) {
    auto sim = data.Fork();
    Coordinator coordinator(*sim, data.catalog);
    const auto result = coordinator.Run(TpchQuery(q));
    const auto comparison = CompareResults(OracleQuery(TpchQuery(q), *sim, data.catalog), FetchResult(*sim, result), true);
    EXPECT_TRUE(comparison.equal) << "Q" << q << ": " << comparison.detail;
  }
}

TEST(ResultComparison, ReportsDifferences) {
  const auto a = testing::KeyValueBatch({1, 2}, {10, 20});
  const auto b = testing::KeyValueBatch({2, 1}, {20, 10});
  EXPECT_FALSE(CompareResults(a, b, true).equal);
  EXPECT_TRUE(CompareResults(a, b, false).equal);
  EXPECT_FALSE(CompareResults(a, testing::KeyValueBatch({1}, {10}), false).equal);
  EXPECT_NE(FormatTable(a).find("0.20"), std::string::npos);
}

TEST(Queries, Catalogue) {
  for (int q : {1, 6, 12}) EXPECT_TRUE(IsSupportedTpchQuery(q));
  EXPECT_FALSE(IsSupportedTpchQuery(2));
  EXPECT_THROW(TpchQuery(2), SkyliteError);
}

TEST(RunReport, ReconcilesWithLedger) {
  const auto& data = Tiny();
  auto sim = data.Fork();
  Coordinator coordinator(*sim, data.catalog);
  const size_t mark = sim->LedgerSize();
  const auto result = coordinator.Run(TpchQuery(12));
  const auto report = MakeRunReport(*sim, result, mark);
  std::string detail;
  EXPECT_TRUE(ReconcileReport(report, *sim, mark, &detail)) << detail;
  double sum = 0;
  for (const auto& [category, cents] : report.costs_cents) sum += cents;
  EXPECT_DOUBLE_EQ(sum, report.total_cents);
  EXPECT_GT(report.Cost(CostCategory::kComputeGibSeconds), 0);
  EXPECT_GT(report.bytes_scanned, 0u);
  EXPECT_EQ(report.ToJson()["query_id"], result.query_id);
  EXPECT_NE(report.ToText().find(result.query_id), std::string::npos);

  // A report built from an earlier mark includes foreign entries and must not reconcile.
  auto other = data.Fork();
  Coordinator second(*other, data.catalog);
  second.Run(TpchQuery(6));
  const size_t other_mark = other->LedgerSize();
  const auto other_result = second.Run("select count(*) as n from orders");
  const auto whole = MakeRunReport(*other, other_result, 0);
  EXPECT_FALSE(ReconcileReport(whole, *other, 0, &detail));
  EXPECT_TRUE(ReconcileReport(MakeRunReport(*other, other_result, other_mark), *other, other_mark, &detail)) << detail;
}

TEST(RunReport, MedianPicksLowerMiddle) {
  std::vector<RunReport> reports(4);
  for (int i = 0; i < 4; ++i) {
    reports[static_cast<size_t>(i)].latency_ms = std::vector<double>{40, 10, 30, 20}[static_cast<size_t>(i)];
    reports[static_cast<size_t>(i)].query_id = std::to_string(i);
  }
  EXPECT_EQ(MedianReport(reports).latency_ms, 20);
  reports.pop_back();
  EXPECT_EQ(MedianReport(reports).latency_ms, 30);
}

TEST(Sweep, OneRowPerScaleFactor) {
  SweepOptions options;
  options.scale_factors = {0.001, 0.01};
  options.queries = {6};
  const auto rows = RunSweep(options);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_LT(rows[0].data_bytes, rows[1].data_bytes);
  for (const auto& row : rows) {
    ASSERT_EQ(row.runs.size(), 1u);
    EXPECT_EQ(row.runs[0].query, 6);
    EXPECT_GT(row.runs[0].invocations, 0);
    EXPECT_DOUBLE_EQ(row.latency_ms, row.runs[0].latency_ms);
  }
  EXPECT_NE(FormatSweep(rows).find("0.01"), std::string::npos);
}

}  // namespace
}  // namespace skylite
