#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "skylite/common/errors.hpp"
#include "skylite/sim/simulator.hpp"

namespace skylite {
namespace {

const FunctionSpec kFn{"fn", 2048};

RequestContext At(SimTime t, std::string tag = "t") { return {t, std::move(tag)}; }

double Median(std::vector<SimTime> values) {
  std::sort(values.begin(), values.end());
  return static_cast<double>(values[values.size() / 2]);
}

TEST(Invoke, FirstInvocationIsColdWithinPublishedRange) {
  Simulator sim;
  const auto id = sim.Invoke(kFn, "{}", [](WorkerContext&) {});
  const auto record = sim.Invocation(id);
  EXPECT_EQ(record.start_kind, StartKind::kCold);
  const SimTime delay = record.start_time - record.submit_time;
  EXPECT_GE(delay, Millis(122));
  EXPECT_LE(delay, Millis(451));
}

TEST(Invoke, ImmediateSecondInvocationIsWarm) {
  Simulator sim;
  sim.Invoke(kFn, "{}", [](WorkerContext& ctx) { ctx.Advance(Millis(10)); });
  sim.RunUntilIdle();
  const auto id = sim.Invoke(kFn, "{}", [](WorkerContext&) {});
  const auto record = sim.Invocation(id);
  EXPECT_EQ(record.start_kind, StartKind::kWarm);
  EXPECT_GE(record.start_time - record.submit_time, Millis(5));
  EXPECT_LE(record.start_time - record.submit_time, Millis(9));
}

TEST(Invoke, SandboxExpiresAfterKeepAlive) {
  Simulator sim;
  sim.Invoke(kFn, "{}", [](WorkerContext&) {});
  sim.RunUntilIdle();
  sim.AdvanceIdle(sim.Config().keep_alive + Seconds(1));
  const auto id = sim.Invoke(kFn, "{}", [](WorkerContext&) {});
  EXPECT_EQ(sim.Invocation(id).start_kind, StartKind::kCold);
}

TEST(Invoke, ConcurrentInvocationsAreAllCold) {
  Simulator sim;
  for (int i = 0; i < 5; ++i) {
    const auto id = sim.Invoke(kFn, "{}", [](WorkerContext&) {});
    EXPECT_EQ(sim.Invocation(id).start_kind, StartKind::kCold);
  }
}

TEST(Invoke, QuotaBoundary) {
  SimConfig config;
  config.admission_quota = 1000;
  Simulator sim(config);
  for (int i = 0; i < 1000; ++i) sim.Invoke(kFn, "{}", [](WorkerContext&) {});
  try {
    sim.Invoke(kFn, "{}", [](WorkerContext&) {});
    FAIL() << "expected QuotaExceeded";
  } catch (const SkyliteError& error) {
    EXPECT_EQ(error.Code(), ErrorCode::kQuotaExceeded);
  }
}

TEST(Invoke, PayloadLimit) {
  Simulator sim;
  const std::string big(sim.Config().payload_limit_bytes + 1, 'x');
  try {
    sim.Invoke(kFn, big, [](WorkerContext&) {});
    FAIL() << "expected PayloadTooLarge";
  } catch (const SkyliteError& error) {
    EXPECT_EQ(error.Code(), ErrorCode::kPayloadTooLarge);
  }
  EXPECT_NO_THROW(sim.Invoke(kFn, std::string(sim.Config().payload_limit_bytes, 'x'), [](WorkerContext&) {}));
}

TEST(Invoke, BillsDurationAtMemorySize) {
  Simulator sim;
  const auto id = sim.Invoke({"fn", 1024}, "{}", [](WorkerContext& ctx) { ctx.Advance(Seconds(2)); }, {.at = std::nullopt, .parent = kNoInvocation, .tag = "q", .failure_queue = ""});
  sim.RunUntilIdle();
  const auto record = sim.Invocation(id);
  EXPECT_EQ(record.state, InvocationState::kFinished);
  EXPECT_EQ(record.end_time - record.start_time, Seconds(2));
  const double expected = 1.0 * 2.0 / 3600.0 * sim.Config().prices.MemoryPricePerGibHour(1024);
  EXPECT_NEAR(sim.TotalCost(CostCategory::kComputeGibSeconds, "q"), expected, 1e-15);
}

TEST(Invoke, ChildInvocationRecordsParent) {
  Simulator sim;
  InvocationId child = kNoInvocation;
  const auto root = sim.Invoke(kFn, "{}", [&](WorkerContext& ctx) {
    child = ctx.Invoke(kFn, "{}", [](WorkerContext&) {}, "");
  });
  sim.RunUntilIdle();
  ASSERT_NE(child, kNoInvocation);
  EXPECT_EQ(sim.Invocation(child).parent, root);
  EXPECT_GT(sim.Invocation(child).submit_time, sim.Invocation(root).start_time);
}

TEST(Invoke, PayloadStaysInRequestLog) {
  Simulator sim;
  const auto id = sim.Invoke(kFn, "request-body", [](WorkerContext&) {});
  sim.RunUntilIdle();
  EXPECT_EQ(sim.InvocationPayload(id), "request-body");
  EXPECT_EQ(sim.Invocation(id).payload_bytes, 12u);
}

TEST(Invoke, FaultPlanCanBeReplaced) {
  SimConfig config;
  config.faults.crash_fraction = 1.0;
  config.faults.affect_storage_requests = false;
  Simulator sim(config);
  const auto crashed = sim.Invoke(kFn, "{}", [](WorkerContext&) {});
  sim.RunUntilIdle();
  sim.SetFaults(FaultPlan{});
  bool ran = false;
  const auto healthy = sim.Invoke(kFn, "{}", [&](WorkerContext&) { ran = true; });
  sim.RunUntilIdle();
  EXPECT_TRUE(sim.Invocation(crashed).crashed);
  EXPECT_FALSE(sim.Invocation(healthy).crashed);
  EXPECT_TRUE(ran);
  EXPECT_TRUE(sim.Config().faults.IsNeutral());
}

TEST(Invoke, CrashSendsFailureNotice) {
  SimConfig config;
  config.faults.crash_fraction = 1.0;
  config.faults.affect_storage_requests = false;
  Simulator sim(config);
  bool ran = false;
  const auto id = sim.Invoke(kFn, "payload-1", [&](WorkerContext&) { ran = true; }, {.at = std::nullopt, .parent = kNoInvocation, .tag = "", .failure_queue = "failures"});
  sim.RunUntilIdle();
  EXPECT_FALSE(ran);
  EXPECT_EQ(sim.Invocation(id).state, InvocationState::kFailed);
  const auto messages = sim.ReceiveMessages(At(sim.Now() + Seconds(5)), "failures", 10);
  ASSERT_EQ(messages.size(), 1u);
  EXPECT_NE(messages[0].body.find("payload-1"), std::string::npos);
  EXPECT_NE(messages[0].body.find("invocation_failed"), std::string::npos);
}

TEST(Invoke, StragglerStretchesElapsedTime) {
  SimConfig config;
  config.faults.straggler_fraction = 1.0;
  config.faults.straggler_slowdown = 10.0;
  Simulator sim(config);
  const auto id = sim.Invoke(kFn, "{}", [](WorkerContext& ctx) { ctx.Advance(Seconds(1)); });
  sim.RunUntilIdle();
  const auto record = sim.Invocation(id);
  EXPECT_TRUE(record.straggler);
  EXPECT_EQ(record.end_time - record.start_time, Seconds(10));
}

TEST(ObjectStore, PutGetRoundtripAndEmptyObject) {
  Simulator sim;
  sim.PutObject(At(0), "b", "k", "hello");
  EXPECT_EQ(sim.GetObjectRange(At(0), "b", "k", 0, kToEnd).data, "hello");
  EXPECT_EQ(sim.GetObjectRange(At(0), "b", "k", 1, 3).data, "ell");
  EXPECT_EQ(sim.GetObjectSuffix(At(0), "b", "k", 2).data, "lo");
  sim.PutObject(At(0), "b", "empty", "");
  EXPECT_EQ(sim.GetObjectRange(At(0), "b", "empty", 0, kToEnd).data, "");
}

TEST(ObjectStore, ZeroLengthRangeIsOneBilledRequest) {
  Simulator sim;
  sim.PutObject(At(0), "b", "k", "hello", StorageClass::kStandard);
  const double before = sim.TotalCost(CostCategory::kRequestsRead);
  EXPECT_EQ(sim.GetObjectRange(At(0), "b", "k", 0, 0).data, "");
  EXPECT_DOUBLE_EQ(sim.TotalCost(CostCategory::kRequestsRead) - before, 40.0 / 1e6);
}

TEST(ObjectStore, MissingKeyAndBadRange) {
  Simulator sim;
  sim.PutObject(At(0), "b", "k", "hello");
  try {
    sim.GetObjectRange(At(0), "b", "missing", 0, kToEnd);
    FAIL();
  } catch (const SkyliteError& error) {
    EXPECT_EQ(error.Code(), ErrorCode::kNoSuchKey);
  }
  try {
    sim.GetObjectRange(At(0), "b", "k", 10, 1);
    FAIL();
  } catch (const SkyliteError& error) {
    EXPECT_EQ(error.Code(), ErrorCode::kRangeUnsatisfiable);
  }
}

TEST(ObjectStore, MedianLatenciesMatchStorageClasses) {
  Simulator sim;
  const std::string kib(1024, 'x');
  std::vector<SimTime> standard_put, hot_put, standard_get;
  for (int i = 0; i < 4001; ++i) {
    standard_put.push_back(sim.PutObject(At(0), "b", "s", kib, StorageClass::kStandard).latency);
    hot_put.push_back(sim.PutObject(At(0), "b", "h", kib, StorageClass::kHot).latency);
    standard_get.push_back(sim.GetObjectRange(At(0), "b", "s", 0, kToEnd).first_byte_latency);
  }
  EXPECT_NEAR(Median(standard_put), Millis(40), Millis(40) * 0.1);
  EXPECT_NEAR(Median(hot_put), Millis(8), Millis(8) * 0.1);
  EXPECT_NEAR(Median(standard_get), Millis(27), Millis(27) * 0.1);
}

TEST(ObjectStore, ListByPrefixAndBilling) {
  Simulator sim;
  EXPECT_TRUE(sim.ListObjects(At(0), "b", "").empty());
  sim.PutObject(At(0), "b", "b/1", "x");
  sim.PutObject(At(0), "b", "a/2", "x");
  sim.PutObject(At(0), "b", "a/1", "x");
  EXPECT_EQ(sim.ListObjects(At(0), "b", "a/"), (std::vector<std::string>{"a/1", "a/2"}));

  Simulator many;
  for (int i = 0; i < 1500; ++i) many.PutObject(At(0), "b", "p/" + std::to_string(i), "");
  const double before = many.TotalCost(CostCategory::kRequestsRead);
  EXPECT_EQ(many.ListObjects(At(0), "b", "p/").size(), 1500u);
  EXPECT_DOUBLE_EQ(many.TotalCost(CostCategory::kRequestsRead) - before, 2 * 40.0 / 1e6);
}

TEST(ObjectStore, HotClassTransferIsBilled) {
  Simulator sim;
  const std::string mib(kMiB, 'x');
  sim.PutObject(At(0), "b", "k", mib, StorageClass::kHot);
  const double before = sim.TotalCost(CostCategory::kTransferGib);
  sim.GetObjectRange(At(0), "b", "k", 0, kToEnd);
  EXPECT_NEAR(sim.TotalCost(CostCategory::kTransferGib) - before, 0.15 / 1024.0, 1e-15);
}

TEST(Queue, SendReceiveSemantics) {
  Simulator sim;
  EXPECT_TRUE(sim.ReceiveMessages(At(0), "q", 10).empty());
  sim.SendMessage(At(0), "q", "one");
  const auto got = sim.ReceiveMessages(At(Seconds(1)), "q", 10);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].body, "one");
  EXPECT_TRUE(sim.ReceiveMessages(At(Seconds(1)), "q", 10).empty());
}

TEST(Queue, FiveSendsTwoReceives) {
  Simulator sim;
  for (int i = 0; i < 5; ++i) sim.SendMessage(At(0), "q", std::to_string(i));
  const auto first = sim.ReceiveMessages(At(Seconds(1)), "q", 3);
  const auto second = sim.ReceiveMessages(At(Seconds(1)), "q", 3);
  EXPECT_EQ(first.size(), 3u);
  EXPECT_EQ(second.size(), 2u);
  std::set<std::string> bodies;
  for (const auto& m : first) bodies.insert(m.body);
  for (const auto& m : second) bodies.insert(m.body);
  EXPECT_EQ(bodies, (std::set<std::string>{"0", "1", "2", "3", "4"}));
}

TEST(Queue, MessageInvisibleBeforeEnqueue) {
  Simulator sim;
  sim.SendMessage(At(Seconds(10)), "q", "later");
  EXPECT_TRUE(sim.ReceiveMessages(At(Seconds(1)), "q", 10).empty());
  EXPECT_EQ(sim.ReceiveMessages(At(Seconds(11)), "q", 10).size(), 1u);
}

TEST(Queue, DuplicateDeliveryFault) {
  SimConfig config;
  config.faults.queue_duplicate_fraction = 1.0;
  Simulator sim(config);
  sim.SendMessage(At(0), "q", "m");
  EXPECT_EQ(sim.ReceiveMessages(At(Seconds(1)), "q", 10).size(), 1u);
  EXPECT_EQ(sim.ReceiveMessages(At(Seconds(1)), "q", 10).size(), 1u);
}

TEST(KeyValue, LastWriterWins) {
  Simulator sim;
  EXPECT_FALSE(sim.KvGet(At(0), "t", "k").value.has_value());
  sim.KvPut(At(0), "t", "k", "1");
  sim.KvPut(At(0), "t", "k", "2");
  EXPECT_EQ(sim.KvGet(At(0), "t", "k").value, "2");
  EXPECT_EQ(sim.KvScan(At(0), "t").size(), 1u);
  sim.KvClear("t");
  EXPECT_TRUE(sim.KvScan(At(0), "t").empty());
}

TEST(Prices, PublishedUnitPrices) {
  Simulator sim;
  CostLedger empty;
  EXPECT_EQ(empty.TotalCost(), 0.0);
  sim.BillCompute(At(0, "c"), 10240, Seconds(3600));
  EXPECT_NEAR(sim.TotalCost(CostCategory::kComputeGibSeconds), 38.4, 1e-9);
  const PriceSheet prices;
  EXPECT_DOUBLE_EQ(prices.MemoryPricePerGibHour(kMaxFunctionMemoryMib), 3.84);
  EXPECT_DOUBLE_EQ(prices.MemoryPricePerGibHour(kMinFunctionMemoryMib), 4.80);
  const double mid = prices.MemoryPricePerGibHour(2048);
  EXPECT_GE(mid, 3.84);
  EXPECT_LE(mid, 4.80);
  EXPECT_EQ(prices.standard.read_per_million, 40);
  EXPECT_EQ(prices.standard.write_per_million, 500);
  EXPECT_EQ(prices.hot.transfer_read_per_gib, 0.15);
}

TEST(Latency, SamplesStayClamped) {
  Rng rng(7);
  const LatencyModel model;
  for (const auto* dist : {&model.cold_start, &model.warm_start, &model.standard_read, &model.hot_write}) {
    for (int i = 0; i < 10000; ++i) {
      const SimTime sample = dist->Sample(rng);
      ASSERT_GE(sample, Millis(dist->min_ms));
      ASSERT_LE(sample, Millis(dist->max_ms));
    }
  }
}

TEST(Latency, ParseRoundtrip) {
  const LatencyDistribution dist{1, 2, 30, 40};
  EXPECT_EQ(LatencyDistribution::Parse(dist.ToString()), dist);
  EXPECT_THROW(LatencyDistribution::Parse("nonsense"), SkyliteError);
}

TEST(Config, ParseOverridesAndRejectsUnknownKeys) {
  const SimConfig config = SimConfig::Parse("# comment\nseed = 9\nfault.crash_fraction = 0.05\n");
  EXPECT_EQ(config.seed, 9u);
  EXPECT_DOUBLE_EQ(config.faults.crash_fraction, 0.05);
  EXPECT_THROW(SimConfig::Parse("no.such.key = 1"), SkyliteError);
  EXPECT_EQ(SimConfig::Parse(SimConfig::Defaults().ToConfigText()), SimConfig::Defaults());
}

// Runs a fixed mixed workload and returns its timeline and ledger.
std::pair<std::vector<SimEvent>, CostLedger> Workload(const SimConfig& config) {
  Simulator sim(config);
  for (int i = 0; i < 20; ++i) {
    sim.Invoke(kFn, "{}", [i](WorkerContext& ctx) {
      auto& s = ctx.Sim();
      s.PutObject(ctx.Request(), "b", "k" + std::to_string(i), std::string(100 * i, 'x'));
      ctx.Advance(Millis(10 * i));
      s.GetObjectRange(ctx.Request(), "b", "k" + std::to_string(i), 0, kToEnd);
      s.SendMessage(ctx.Request(), "done", std::to_string(i));
    }, {.at = std::nullopt, .parent = kNoInvocation, .tag = "w", .failure_queue = "failures"});
  }
  sim.RunUntilIdle();
  return {sim.EventLog(), sim.Ledger()};
}

bool SameLedger(const CostLedger& a, const CostLedger& b) {
  if (a.Size() != b.Size()) return false;
  for (size_t i = 0; i < a.Size(); ++i) {
    const auto& x = a.Entries()[i];
    const auto& y = b.Entries()[i];
    if (x.time != y.time || x.category != y.category || x.quantity != y.quantity || x.cost_cents != y.cost_cents ||
        x.tag != y.tag) {
      return false;
    }
  }
  return true;
}

bool SameTimeline(const std::vector<SimEvent>& a, const std::vector<SimEvent>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].time != b[i].time || a[i].kind != b[i].kind || a[i].invocation != b[i].invocation ||
        a[i].detail != b[i].detail) {
      return false;
    }
  }
  return true;
}

TEST(Determinism, FixedSeedGivesIdenticalTimelineAndLedger) {
  const auto a = Workload(SimConfig::Defaults());
  const auto b = Workload(SimConfig::Defaults());
  EXPECT_TRUE(SameTimeline(a.first, b.first));
  EXPECT_TRUE(SameLedger(a.second, b.second));
}

TEST(Determinism, NeutralFaultPlanChangesNothing) {
  SimConfig neutral;
  neutral.faults.straggler_slowdown = 10.0;
  neutral.faults.rng_seed = 1234;
  ASSERT_TRUE(neutral.faults.IsNeutral());
  const auto a = Workload(SimConfig::Defaults());
  const auto b = Workload(neutral);
  EXPECT_TRUE(SameTimeline(a.first, b.first));
  EXPECT_TRUE(SameLedger(a.second, b.second));
}

TEST(Billing, EveryRequestIsOneLedgerEntry) {
  Simulator sim;
  const size_t before = sim.LedgerSize();
  sim.PutObject(At(0), "b", "k", "");
  const size_t after_put = sim.LedgerSize();
  sim.GetObjectRange(At(0), "b", "k", 0, kToEnd, false);
  const size_t after_get = sim.LedgerSize();
  EXPECT_GE(after_put - before, 1u);
  EXPECT_EQ(after_get - after_put, 1u);
}

TEST(Timeline, RunUntilThrowsWhenQueueDrains) {
  Simulator sim;
  EXPECT_THROW(sim.RunUntil([] { return false; }), SkyliteError);
}

}  // namespace
}  // namespace skylite
