#include <random>

#include <gtest/gtest.h>

#include "skylite/common/errors.hpp"
#include "skylite/sim/simulator.hpp"
#include "skylite/storage/catalog.hpp"
#include "skylite/storage/columnar_file.hpp"
#include "skylite/storage/input_handler.hpp"
#include "skylite/storage/output_handler.hpp"
#include "skylite/storage/range_planner.hpp"

namespace skylite {
namespace {

Schema WideSchema(size_t columns) {
  std::vector<Field> fields;
  for (size_t i = 0; i < columns; ++i) fields.push_back({"c" + std::to_string(i), DataType::Int64(), false});
  return Schema(std::move(fields));
}

RecordBatch Sequence(const Schema& schema, int64_t begin, size_t rows) {
  RecordBatch batch(schema);
  for (size_t r = 0; r < rows; ++r) {
    std::vector<Value> row;
    for (size_t c = 0; c < schema.Size(); ++c) row.push_back(Value::Int64(begin + static_cast<int64_t>(r * 7 + c)));
    batch.AppendRow(row);
  }
  return batch;
}

size_t TotalRows(const std::vector<RecordBatch>& batches) {
  size_t rows = 0;
  for (const auto& b : batches) rows += b.NumRows();
  return rows;
}

IoContext Io(Simulator& sim) { return {&sim, "t", 0, 1.0}; }

TEST(ColumnarFile, ZeroBatchesGiveFooterOnlyFile) {
  const Schema schema = WideSchema(2);
  const std::string file = WriteColumnarFile(schema, {});
  const FileFooter footer = ReadFooterFromFile(file);
  EXPECT_TRUE(footer.row_groups.empty());
  EXPECT_EQ(footer.schema, schema);
  EXPECT_TRUE(ReadColumnarFile(file).empty() || TotalRows(ReadColumnarFile(file)) == 0);
}

TEST(ColumnarFile, RowGroupsFollowCeilingArithmetic) {
  const Schema schema = WideSchema(2);
  const std::string file = WriteColumnarFile(schema, {Sequence(schema, 0, 10000)}, {4096});
  const FileFooter footer = ReadFooterFromFile(file);
  ASSERT_EQ(footer.row_groups.size(), 3u);
  EXPECT_EQ(footer.row_groups[0].row_count, 4096u);
  EXPECT_EQ(footer.row_groups[1].row_count, 4096u);
  EXPECT_EQ(footer.row_groups[2].row_count, 1808u);
  const auto batches = ReadColumnarFile(file);
  ASSERT_FALSE(batches.empty());
  EXPECT_EQ(batches.back().NumRows(), 1808u);
  EXPECT_EQ(TotalRows(batches), 10000u);
}

TEST(ColumnarFile, StatisticsArePopulated) {
  const Schema schema = WideSchema(1);
  const std::string file = WriteColumnarFile(schema, {Sequence(schema, 5, 100)}, {64});
  const FileFooter footer = ReadFooterFromFile(file);
  ASSERT_EQ(footer.row_groups.size(), 2u);
  EXPECT_EQ(footer.row_groups[0].columns[0].min, Value::Int64(5));
  EXPECT_EQ(footer.row_groups[0].columns[0].max, Value::Int64(5 + 63 * 7));
}

TEST(ColumnarFile, GarbageIsCorrupt) {
  try {
    ReadFooterFromFile("this is definitely not a columnar file");
    FAIL();
  } catch (const SkyliteError& error) {
    EXPECT_EQ(error.Code(), ErrorCode::kCorruptFile);
  }
}

TEST(ColumnarFile, TamperedChunkIsCorrupt) {
  const Schema schema = WideSchema(1);
  std::string file = WriteColumnarFile(schema, {Sequence(schema, 0, 1000)});
  const FileFooter footer = ReadFooterFromFile(file);
  const auto& chunk = footer.row_groups[0].columns[0];
  for (uint64_t i = 0; i < chunk.length; ++i) file[chunk.offset + i] = static_cast<char>(0x5a);
  try {
    DecodeChunk(std::string_view(file).substr(chunk.offset, chunk.length), chunk, schema.At(0), 1000);
    FAIL();
  } catch (const SkyliteError& error) {
    EXPECT_EQ(error.Code(), ErrorCode::kCorruptFile);
  }
}

TEST(ColumnarFile, SchemaMismatchOnAppend) {
  ColumnarFileWriter writer(WideSchema(2));
  try {
    writer.Append(Sequence(WideSchema(3), 0, 1));
    FAIL();
  } catch (const SkyliteError& error) {
    EXPECT_EQ(error.Code(), ErrorCode::kSchemaMismatch);
  }
}

TEST(RangePlanner, ProjectionPrunesColumns) {
  const Schema schema = WideSchema(16);
  const std::string file = WriteColumnarFile(schema, {Sequence(schema, 0, 5000)}, {2048});
  const FileFooter footer = ReadFooterFromFile(file);
  const auto plan = PlanRanges("b", "k", footer, {"c3"});
  uint64_t column_bytes = 0;
  for (const auto& group : footer.row_groups) column_bytes += group.columns[3].length;
  EXPECT_EQ(plan.TotalBytes(), column_bytes);
  EXPECT_EQ(plan.ranges.size(), footer.row_groups.size());
  try {
    PlanRanges("b", "k", footer, {"nope"});
    FAIL();
  } catch (const SkyliteError& error) {
    EXPECT_EQ(error.Code(), ErrorCode::kUnknownColumn);
  }
}

TEST(RangePlanner, StatisticsPruneEveryGroup) {
  const Schema schema = WideSchema(1);
  const std::string file = WriteColumnarFile(schema, {Sequence(schema, 0, 5000)}, {1000});
  const FileFooter footer = ReadFooterFromFile(file);
  const auto plan = PlanRanges("b", "k", footer, {"c0"}, {{"c0", PruneOp::kLt, Value::Int64(0)}});
  EXPECT_TRUE(plan.ranges.empty());
  EXPECT_TRUE(plan.row_groups.empty());
  const auto partial = PlanRanges("b", "k", footer, {"c0"}, {{"c0", PruneOp::kGe, Value::Int64(4000 * 7)}});
  EXPECT_EQ(partial.row_groups, (std::vector<size_t>{4}));
}

TEST(RangePlanner, LargeChunkSplitsIntoAlignedSubranges) {
  FileFooter footer;
  footer.schema = WideSchema(1);
  RowGroupMeta group;
  group.row_count = 1;
  ColumnChunkMeta chunk;
  chunk.offset = 5;
  chunk.length = 40 * kMiB;
  group.columns.push_back(chunk);
  footer.row_groups.push_back(group);
  const auto plan = PlanRanges("b", "k", footer, {"c0"}, {}, 16 * kMiB);
  ASSERT_EQ(plan.ranges.size(), 3u);
  EXPECT_EQ(plan.ranges[0].length, 16 * kMiB);
  EXPECT_EQ(plan.ranges[1].length, 16 * kMiB);
  EXPECT_EQ(plan.ranges[2].length, 8 * kMiB);
  uint64_t expected_offset = 5;
  for (const auto& range : plan.ranges) {
    EXPECT_EQ(range.offset, expected_offset);
    EXPECT_EQ(range.buffer_offset, expected_offset - 5);
    EXPECT_EQ(range.target_buffer_index, 0u);
    expected_offset += range.length;
  }
}

TEST(Footer, SmallFooterNeedsOneProbe) {
  Simulator sim;
  const Schema schema = WideSchema(1);
  sim.PutObject({0, "t"}, "b", "k", WriteColumnarFile(schema, {Sequence(schema, 0, 10)}));
  RangeFetcher fetcher(Io(sim), {}, 0);
  const auto read = ReadFooter(fetcher, "b", "k", 0, 64 * kKiB);
  EXPECT_EQ(read.requests, 1);
  EXPECT_EQ(read.footer.TotalRows(), 10u);
}

TEST(Footer, LargeFooterNeedsTwoRequests) {
  Simulator sim;
  const Schema schema = WideSchema(40);
  // Many row groups of many columns make a footer larger than 100 KiB.
  const std::string file = WriteColumnarFile(schema, {Sequence(schema, 0, 6000)}, {10});
  const FileFooter footer = ReadFooterFromFile(file);
  ASSERT_GT(SerializeFooter(footer).size(), 100 * kKiB);
  sim.PutObject({0, "t"}, "b", "k", file);
  const size_t before = sim.LedgerSize();
  const double reads_before = sim.TotalCost(CostCategory::kRequestsRead);
  RangeFetcher fetcher(Io(sim), {}, 0);
  const auto read = ReadFooter(fetcher, "b", "k", 0, 64 * kKiB);
  EXPECT_EQ(read.requests, 2);
  EXPECT_EQ(read.footer, footer);
  EXPECT_DOUBLE_EQ(sim.TotalCost(CostCategory::kRequestsRead) - reads_before, 2 * 40.0 / 1e6);
  EXPECT_GT(sim.LedgerSize(), before);
}

TEST(Fetch, FaultFreePlanBillsOneRequestPerRange) {
  Simulator sim;
  const Schema schema = WideSchema(2);
  const std::string file = WriteColumnarFile(schema, {Sequence(schema, 0, 4000)}, {2000});
  sim.PutObject({0, "t"}, "b", "k", file);
  const auto plan = PlanRanges("b", "k", ReadFooterFromFile(file), {"c0", "c1"});
  ASSERT_EQ(plan.ranges.size(), 4u);
  RangeFetcher fetcher(Io(sim), {}, 0);
  const auto buffers = fetcher.FetchPlan(plan, 0);
  EXPECT_EQ(fetcher.Stats().requests, 4u);
  for (size_t i = 0; i < plan.chunks.size(); ++i) {
    EXPECT_EQ(buffers[i], file.substr(plan.chunks[i].offset, plan.chunks[i].length));
  }
}

TEST(Fetch, StragglingRangeIsRetriggeredWithIdenticalBytes) {
  const Schema schema = WideSchema(2);
  const std::string file = WriteColumnarFile(schema, {Sequence(schema, 0, 4000)}, {2000});
  const auto plan = PlanRanges("b", "k", ReadFooterFromFile(file), {"c0", "c1"});

  Simulator clean;
  clean.PutObject({0, "t"}, "b", "k", file);
  RangeFetcher clean_fetcher(Io(clean), {}, 0);
  const auto expected = clean_fetcher.FetchPlan(plan, 0);

  SimConfig config;
  config.faults.straggler_fraction = 0.25;
  config.faults.straggler_slowdown = 10.0;
  config.faults.affect_invocations = false;
  bool saw_retrigger = false;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    config.faults.rng_seed = seed;
    Simulator sim(config);
    sim.PutObject({0, "t"}, "b", "k", file);
    RangeFetcher fetcher(Io(sim), {}, 0);
    EXPECT_EQ(fetcher.FetchPlan(plan, 0), expected);
    if (fetcher.Stats().retriggers > 0) {
      saw_retrigger = true;
      EXPECT_GE(fetcher.Stats().requests, 5u);
    }
  }
  EXPECT_TRUE(saw_retrigger);
}

TEST(Fetch, DeletedObjectFails) {
  Simulator sim;
  const Schema schema = WideSchema(1);
  const std::string file = WriteColumnarFile(schema, {Sequence(schema, 0, 100)});
  sim.PutObject({0, "t"}, "b", "k", file);
  const auto plan = PlanRanges("b", "k", ReadFooterFromFile(file), {"c0"});
  sim.DeleteObject("b", "k");
  RangeFetcher fetcher(Io(sim), {}, 0);
  try {
    fetcher.FetchPlan(plan, 0);
    FAIL();
  } catch (const SkyliteError& error) {
    EXPECT_EQ(error.Code(), ErrorCode::kFetchFailed);
  }
}

TEST(Fetch, ExhaustedAttemptsFail) {
  SimConfig config;
  config.faults.crash_fraction = 1.0;
  config.faults.affect_invocations = false;
  Simulator clean;
  clean.PutObject({0, "t"}, "b", "k", "abc");
  Simulator sim(config);
  sim.CopyObjectsFrom(clean);
  RangeFetcher fetcher(Io(sim), {}, 0);
  try {
    fetcher.Fetch("b", "k", 0, 3, 0);
    FAIL();
  } catch (const SkyliteError& error) {
    EXPECT_EQ(error.Code(), ErrorCode::kFetchFailed);
  }
  EXPECT_EQ(fetcher.Stats().failures, 4u);
}

TEST(InputHandler, ScanProjectsAndPrunes) {
  Simulator sim;
  const Schema schema = WideSchema(3);
  const std::string file = WriteColumnarFile(schema, {Sequence(schema, 0, 10000)}, {4096});
  sim.PutObject({0, "t"}, "b", "k", file);
  RangeFetcher fetcher(Io(sim), {}, 0);
  InputHandler input(fetcher, {});
  ScanRequest request;
  request.objects = {{"b", "k", {}}};
  request.columns = {"c2"};
  request.predicates = {{"c0", PruneOp::kGe, Value::Int64(8192 * 7)}};
  size_t rows = 0;
  input.Scan(request, 0, [&](ScanBatch&& batch) {
    EXPECT_EQ(batch.batch.NumColumns(), 1u);
    rows += batch.batch.NumRows();
  });
  EXPECT_EQ(rows, 1808u);
  EXPECT_EQ(input.Stats().row_groups_pruned, 2u);
  EXPECT_EQ(input.Stats().row_groups_read, 1u);
}

TEST(InputHandler, RequestEconomy) {
  Simulator sim;
  const Schema schema = WideSchema(16);
  const std::string file = WriteColumnarFile(schema, {Sequence(schema, 0, 20000)}, {4096});
  sim.PutObject({0, "t"}, "b", "k", file);
  const FileFooter footer = ReadFooterFromFile(file);
  uint64_t projected = 0;
  for (const auto& group : footer.row_groups) projected += group.columns[1].length + group.columns[9].length;
  RangeFetcher fetcher(Io(sim), {}, 0);
  InputHandler input(fetcher, {});
  input.Scan({{{"b", "k", {}}}, {"c1", "c9"}, {}}, 0, [](ScanBatch&&) {});
  EXPECT_LE(input.Stats().fetch.bytes, projected + 64 * kKiB);
}

TEST(OutputHandler, DeterministicKeyAndBytes) {
  const Schema schema = WideSchema(2);
  std::string first_bytes;
  for (int attempt = 0; attempt < 2; ++attempt) {
    Simulator sim;
    OutputHandler out(schema);
    for (int i = 0; i < 3; ++i) out.Append(Sequence(schema, i * 4096, 4096));
    const std::string key = OutputObjectKey("q1", 2, 3, 0);
    EXPECT_EQ(key, OutputObjectKey("q1", 2, 3, 0));
    const auto receipt = out.Finalize(Io(sim), 0, "b", key);
    EXPECT_EQ(receipt.rows, 12288u);
    const auto object = sim.PeekObject("b", key);
    ASSERT_TRUE(object.has_value());
    EXPECT_EQ(TotalRows(ReadColumnarFile(*object->bytes)), 12288u);
    if (attempt == 0) {
      first_bytes = *object->bytes;
    } else {
      EXPECT_EQ(*object->bytes, first_bytes);
    }
  }
}

TEST(OutputHandler, EmptyOutputIsValidObject) {
  Simulator sim;
  OutputHandler out(WideSchema(2));
  out.Finalize(Io(sim), 0, "b", "empty");
  const auto object = sim.PeekObject("b", "empty");
  ASSERT_TRUE(object.has_value());
  EXPECT_EQ(TotalRows(ReadColumnarFile(*object->bytes)), 0u);
}

TEST(Catalog, ResolveAndPersist) {
  Catalog catalog;
  TableEntry table;
  table.name = "t";
  table.schema = WideSchema(2);
  catalog.Put(table);
  EXPECT_EQ(catalog.Resolve("t").schema.Size(), 2u);
  EXPECT_TRUE(catalog.Resolve("t").objects.empty());
  try {
    catalog.Resolve("missing");
    FAIL();
  } catch (const SkyliteError& error) {
    EXPECT_EQ(error.Code(), ErrorCode::kUnknownTable);
  }
  EXPECT_EQ(Catalog::FromJson(catalog.ToJson()).Resolve("t"), catalog.Resolve("t"));
}

}  // namespace
}  // namespace skylite
