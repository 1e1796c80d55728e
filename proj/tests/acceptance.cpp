// Acceptance checks: one PASS/FAIL line per criterion. Exit status is the number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "skylite/bench/datagen.hpp"
#include "skylite/bench/oracle.hpp"
#include "skylite/bench/result_reader.hpp"
#include "skylite/bench/sweep.hpp"
#include "skylite/bench/tpch_queries.hpp"
#include "skylite/common/errors.hpp"
#include "skylite/execution/coordinator.hpp"
#include "skylite/execution/worker.hpp"
#include "skylite/sim/simulator.hpp"
#include "test_util.hpp"

namespace skylite {
namespace {

using testing::MakeTpch;
using testing::TpchData;

// Tolerances, pinned.
constexpr double kFloatRelativeTolerance = 1e-9;
constexpr double kOracleBudgetSeconds = 300;
constexpr int kChaosPlans = 20;
constexpr double kMaxStragglerFraction = 0.3;
constexpr double kMaxSlowdown = 10.0;
constexpr double kMaxCrashFraction = 0.1;
constexpr int kTwoLevelThreshold = 8;
constexpr double kMinCacheComputeRatio = 10.0;
constexpr double kPriceTolerance = 1e-9;
constexpr int kLatencySamples = 100000;
constexpr double kMedianTolerance = 0.10;
constexpr double kMaxElasticityRatio = 10.0;
constexpr double kMaxQ6FetchedFraction = 0.45;
// Row-group size for the oracle and chaos data: small enough that every W in the grid receives work.
constexpr size_t kSplitRowGroupRows = 4096;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, double a, double b = 0, double c = 0) {
  char buffer[256];
  std::snprintf(buffer, sizeof(buffer), format, a, b, c);
  return buffer;
}

std::vector<InvocationRecord> WorkerInvocations(const Simulator& sim, const std::string& tag) {
  std::vector<InvocationRecord> out;
  for (const auto& record : sim.Invocations(tag)) {
    if (record.function == kWorkerFunctionName) out.push_back(record);
  }
  return out;
}

const TpchData& SplitData(double scale_factor) {
  static std::map<double, TpchData> cache;
  auto it = cache.find(scale_factor);
  if (it == cache.end()) it = cache.emplace(scale_factor, MakeTpch(scale_factor, kSplitRowGroupRows)).first;
  return it->second;
}

// 1. Engine results equal the single-threaded oracle over the SF x W grid.
Outcome OracleEquivalence() {
  const auto start = std::chrono::steady_clock::now();
  int runs = 0;
  for (double sf : {0.001, 0.01, 0.1}) {
    const TpchData& data = SplitData(sf);
    for (int q : {1, 6, 12}) {
      const RecordBatch expected = OracleQuery(TpchQuery(q), *data.sim, data.catalog);
      for (int w : {1, 2, 7, 16}) {
        auto sim = data.Fork();
        QueryOptions options;
        options.planner.force_workers = w;
        Coordinator coordinator(*sim, data.catalog, options);
        const auto result = coordinator.Run(TpchQuery(q));
        const auto comparison =
            CompareResults(expected, FetchResult(*sim, result), true, kFloatRelativeTolerance);
        ++runs;
        if (!comparison.equal) {
          return {false, Fmt("SF %g Q%g W=%g: ", sf, q, w) + comparison.detail};
        }
      }
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {seconds < kOracleBudgetSeconds,
          std::to_string(runs) + Fmt(" runs equal to the oracle in %.1f s (budget %.0f s)", seconds, kOracleBudgetSeconds)};
}

// 2. Randomized fault plans leave Q12's result bytes unchanged and stay within the attempt budget.
Outcome ChaosInvariance() {
  const TpchData& data = SplitData(0.01);
  QueryOptions options;
  options.planner.force_workers = 7;
  auto clean = data.Fork();
  const auto reference = ResultObjectBytes(*clean, Coordinator(*clean, data.catalog, options).Run(TpchQuery(12)));
  Rng rng(4242);
  int retriggers = 0;
  int max_attempts_seen = 0;
  for (int plan = 0; plan < kChaosPlans; ++plan) {
    SimConfig config;
    config.faults.straggler_fraction = rng.Uniform() * kMaxStragglerFraction;
    config.faults.straggler_slowdown = 1.0 + rng.Uniform() * (kMaxSlowdown - 1.0);
    config.faults.crash_fraction = rng.Uniform() * kMaxCrashFraction;
    config.faults.rng_seed = rng.NextU64();
    auto sim = data.Fork(config);
    QueryResult result;
    try {
      result = Coordinator(*sim, data.catalog, options).Run(TpchQuery(12));
    } catch (const SkyliteError& error) {
      return {false, "plan " + std::to_string(plan) + " did not complete: " + error.what()};
    }
    if (ResultObjectBytes(*sim, result) != reference) {
      return {false, "plan " + std::to_string(plan) + " produced different result bytes"};
    }
    std::map<std::pair<int, int>, int> attempts;
    for (const auto& record : WorkerInvocations(*sim, result.query_id)) {
      const auto fragments = PayloadFragments(sim->InvocationPayload(record.id));
      for (const auto& fragment : fragments) max_attempts_seen = std::max(max_attempts_seen, ++attempts[fragment]);
    }
    if (max_attempts_seen > options.retry.max_attempts) {
      return {false, "plan " + std::to_string(plan) + Fmt(" used %g attempts for one fragment", max_attempts_seen)};
    }
    retriggers += result.Retriggers();
  }
  return {true, std::to_string(kChaosPlans) + " plans identical to the fault-free run; " + std::to_string(retriggers) +
                    " retriggers; at most " + std::to_string(max_attempts_seen) + " attempts per fragment"};
}

// 3. Two-level invocation shape, read from the simulator's event log.
Outcome TwoLevelInvocation() {
  const TpchData& data = SplitData(0.01);
  std::ostringstream detail;
  for (int w : {16, 65, 100, 400}) {
    auto sim = data.Fork();
    QueryOptions options;
    options.planner.force_workers = w;
    options.two_level_threshold = kTwoLevelThreshold;
    const auto result = Coordinator(*sim, data.catalog, options).Run(TpchQuery(6));
    const int scan_pipeline = result.stages.at(0).pipeline_id;
    std::map<InvocationId, InvocationId> parent;
    for (const auto& event : sim->EventLog()) {
      if (event.kind == SimEventKind::kInvokeSubmit && event.tag == result.query_id) parent[event.invocation] = event.parent;
    }
    int invocations = 0;
    int roots = 0;
    int depth = 0;
    for (const auto& record : WorkerInvocations(*sim, result.query_id)) {
      const auto fragments = PayloadFragments(sim->InvocationPayload(record.id));
      if (fragments.empty() || fragments.front().first != scan_pipeline) continue;
      ++invocations;
      int d = 1;
      for (InvocationId at = record.id; parent.at(at) != kNoInvocation; at = parent.at(at)) ++d;
      depth = std::max(depth, d);
      if (parent.at(record.id) == kNoInvocation) ++roots;
    }
    const int expected_roots = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(w))));
    detail << "W=" << w << ": " << invocations << " invocations, depth " << depth << ", " << roots << " roots; ";
    if (invocations != w || depth != 2 || roots != expected_roots) return {false, detail.str()};
  }
  return {true, detail.str() + "threshold " + std::to_string(kTwoLevelThreshold)};
}

// 4. Result cache: a repeat is free of workers and much cheaper; regenerated data misses.
Outcome CacheBehavior() {
  TpchData data = MakeTpch(0.01);
  auto sim = data.Fork();
  auto compute = [&](const QueryResult& r) {
    return sim->Ledger().TotalCost(CostCategory::kComputeGibSeconds, r.query_id);
  };
  Coordinator coordinator(*sim, data.catalog);
  const auto cold = coordinator.Run(TpchQuery(12));
  const auto warm = coordinator.Run(TpchQuery(12));
  const int warm_workers = static_cast<int>(WorkerInvocations(*sim, warm.query_id).size());
  const double ratio = compute(cold) / std::max(compute(warm), 1e-300);
  const bool same = ResultObjectBytes(*sim, cold) == ResultObjectBytes(*sim, warm);

  DataGenSpec spec;
  spec.scale_factor = 0.01;
  const Catalog regenerated = GenerateTpch(*sim, spec, data.catalog);
  const auto after = Coordinator(*sim, regenerated).Run(TpchQuery(12));
  const bool missed = !after.result_cache_hit && !WorkerInvocations(*sim, after.query_id).empty();
  return {warm.result_cache_hit && warm_workers == 0 && ratio >= kMinCacheComputeRatio && same && missed,
          Fmt("repeat: %g worker invocations, cold/warm compute %.0fx", warm_workers, ratio) +
              (same ? ", identical bytes" : ", DIFFERENT bytes") +
              (missed ? "; regenerated data missed the cache" : "; regenerated data HIT the cache")};
}

bool Near(double actual, double expected) { return std::abs(actual - expected) <= kPriceTolerance * expected; }

// 5. Billed prices, measured from the ledger.
Outcome CostModelFidelity() {
  Simulator sim;
  const RequestContext ctx{0, "price"};
  sim.PutObject(ctx, "b", "k", std::string(1024, 'x'));
  const size_t mark = sim.LedgerSize();
  constexpr int kRequests = 1000000;
  for (int i = 0; i < kRequests; ++i) sim.GetObjectRange(ctx, "b", "k", 0, 1);

  double reads = 0;
  const auto entries = sim.Ledger().Entries();
  for (size_t i = mark; i < entries.size(); ++i) {
    if (entries[i].category == CostCategory::kRequestsRead) reads += entries[i].cost_cents;
  }
  const size_t write_mark = sim.LedgerSize();
  for (int i = 0; i < kRequests; ++i) sim.PutObject(ctx, "b", "w", "x");
  double writes = 0;
  const auto after = sim.Ledger().Entries();
  for (size_t i = write_mark; i < after.size(); ++i) {
    if (after[i].category == CostCategory::kRequestsWrite) writes += after[i].cost_cents;
  }

  // One GiB-hour of function memory at the smallest and largest tier.
  Simulator compute;
  compute.BillCompute({0, "low"}, kMinFunctionMemoryMib, Seconds(3600) * (1024 / kMinFunctionMemoryMib));
  compute.BillCompute({0, "high"}, kMaxFunctionMemoryMib, Seconds(3600) / 10);
  const double small_tier = compute.Ledger().TotalCost(CostCategory::kComputeGibSeconds, "low");
  const double large_tier = compute.Ledger().TotalCost(CostCategory::kComputeGibSeconds, "high");
  const double tier_2048 = sim.Config().prices.MemoryPricePerGibHour(2048);

  // Hot-class read transfer: billed cents per billed GiB of a 64 MiB read.
  Simulator hot;
  hot.PutObject({0, "put"}, "h", "big", std::string(64 * kMiB, 'z'), StorageClass::kHot);
  hot.GetObjectRange({0, "get"}, "h", "big", 0, kToEnd);
  const auto hot_ledger = hot.Ledger();
  const double transfer = hot_ledger.TotalCost(CostCategory::kTransferGib, "get") /
                          hot_ledger.TotalQuantity(CostCategory::kTransferGib, "get");

  const bool pass = Near(reads, 40) && Near(writes, 500) && Near(small_tier, 4.80) && Near(large_tier, 3.84) &&
                    tier_2048 >= 3.84 && tier_2048 <= 4.80 && Near(transfer, 0.15);
  return {pass, Fmt("1e6 reads %.6f c, 1e6 writes %.6f c, ", reads, writes) +
                    Fmt("GiB-h %.4f..%.4f c (2048 MiB: %.4f c), ", large_tier, small_tier, tier_2048) +
                    Fmt("hot transfer %.6f c/GiB", transfer)};
}

double Median(std::vector<SimTime> samples) {
  std::nth_element(samples.begin(), samples.begin() + static_cast<long>(samples.size() / 2), samples.end());
  return static_cast<double>(samples[samples.size() / 2]);
}

// 6. Sampled latencies against their configured medians and bounds.
Outcome LatencyModelFidelity() {
  const LatencyModel model;
  Rng rng(6);
  std::vector<SimTime> cold;
  std::vector<SimTime> read;
  for (int i = 0; i < kLatencySamples; ++i) {
    cold.push_back(model.cold_start.Sample(rng));
    read.push_back(model.standard_read.Sample(rng));
  }
  const double cold_median = Median(cold) / 1000.0;
  const double read_median = Median(read) / 1000.0;
  const auto [lo, hi] = std::minmax_element(cold.begin(), cold.end());
  const bool in_bounds = *lo >= Millis(122) && *hi <= Millis(451);
  const bool pass = std::abs(cold_median / model.cold_start.median_ms - 1) <= kMedianTolerance && in_bounds &&
                    std::abs(read_median / 27.0 - 1) <= kMedianTolerance;
  return {pass, Fmt("cold start median %.1f ms (configured %.0f), ", cold_median, model.cold_start.median_ms) +
                    Fmt("range [%.1f, %.1f] ms, ", static_cast<double>(*lo) / 1000, static_cast<double>(*hi) / 1000) +
                    Fmt("standard read median %.1f ms", read_median)};
}

// 7. Q1+Q6 latency stays within an order of magnitude while data grows 1000x.
Outcome Elasticity() {
  const auto rows = RunSweep(SweepOptions{});
  double lo = 1e300;
  double hi = 0;
  std::ostringstream detail;
  for (const auto& row : rows) {
    lo = std::min(lo, row.latency_ms);
    hi = std::max(hi, row.latency_ms);
    detail << "SF " << row.scale_factor << ": " << Fmt("%.0f ms; ", row.latency_ms);
  }
  const double ratio = hi / lo;
  return {ratio < kMaxElasticityRatio, detail.str() + Fmt("ratio %.2f (limit %.0f)", ratio, kMaxElasticityRatio)};
}

// 8. Q6 reads only a fraction of lineitem.
Outcome PruningEconomy() {
  TpchData data = MakeTpch(0.1);
  auto sim = data.Fork();
  QueryOptions options;
  options.use_cache = false;
  const auto result = Coordinator(*sim, data.catalog, options).Run(TpchQuery(6));
  // Every byte moved for the query (reads and writes, intermediates included) counts as fetched.
  const double fetched = sim->Ledger().TotalQuantity(CostCategory::kTransferGib, result.query_id) * kBytesPerGib;
  const double total = static_cast<double>(data.catalog.Resolve("lineitem").TotalBytes());
  const double fraction = fetched / total;
  return {fraction < kMaxQ6FetchedFraction,
          Fmt("fetched %.0f of %.0f lineitem bytes = %.1f%%", fetched, total, fraction * 100) +
              Fmt(" (limit %.0f%%)", kMaxQ6FetchedFraction * 100)};
}

// 9. The randomized property suites, run as their own binary.
Outcome PropertySuites() {
  const std::string command = std::string(SKYLITE_PROPERTY_TEST) + " --gtest_brief=1 > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return {status == 0, status == 0 ? "4 properties x 1000 cases, zero failures"
                                   : "property_test exited with status " + std::to_string(status)};
}

// 10. A resumed query re-invokes nothing from its completed stage and ends with the fresh-run result.
Outcome ResumeFromCheckpoint() {
  const TpchData& data = SplitData(0.01);
  QueryOptions options;
  options.use_cache = false;
  options.planner.force_workers = 4;
  auto fresh_sim = data.Fork();
  const auto fresh = Coordinator(*fresh_sim, data.catalog, options).Run(TpchQuery(12));

  auto sim = data.Fork();
  QueryOptions aborting = options;
  aborting.abort_after_stages = 1;
  Coordinator coordinator(*sim, data.catalog, aborting);
  try {
    coordinator.Run(TpchQuery(12));
    return {false, "the forced abort did not happen"};
  } catch (const SkyliteError& error) {
    if (error.Code() != ErrorCode::kQueryAborted) return {false, error.what()};
  }
  std::string query_id;
  for (const auto& record : sim->Invocations()) query_id = record.tag;
  std::set<int> completed;
  for (const auto& record : WorkerInvocations(*sim, query_id)) {
    for (const auto& [pipeline, fragment] : PayloadFragments(sim->InvocationPayload(record.id))) {
      completed.insert(pipeline);
    }
  }
  const InvocationId resume_from = sim->Invocations().back().id;
  const auto resumed = coordinator.Resume(query_id);
  int reinvoked = 0;
  int new_invocations = 0;
  for (const auto& record : WorkerInvocations(*sim, query_id)) {
    if (record.id <= resume_from) continue;
    ++new_invocations;
    for (const auto& [pipeline, fragment] : PayloadFragments(sim->InvocationPayload(record.id))) {
      if (completed.count(pipeline)) ++reinvoked;
    }
  }
  const bool same = ResultObjectBytes(*sim, resumed) == ResultObjectBytes(*fresh_sim, fresh);
  return {completed.size() == 1 && reinvoked == 0 && same,
          std::to_string(completed.size()) + " stage completed before the abort; " + std::to_string(new_invocations) +
              " invocations after resume, " + std::to_string(reinvoked) + " of the completed stage; " +
              (same ? "result identical to a fresh run" : "result DIFFERS from a fresh run")};
}

}  // namespace
}  // namespace skylite

int main() {
  using namespace skylite;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle-equivalence", OracleEquivalence},  {"chaos-invariance", ChaosInvariance},
      {"two-level-invocation", TwoLevelInvocation}, {"cache-behavior", CacheBehavior},
      {"cost-model-fidelity", CostModelFidelity},  {"latency-model-fidelity", LatencyModelFidelity},
      {"elasticity", Elasticity},                   {"pruning-economy", PruningEconomy},
      {"property-suites", PropertySuites},          {"resume-from-checkpoint", ResumeFromCheckpoint},
  };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    const auto start = std::chrono::steady_clock::now();
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& error) {
      outcome = {false, std::string("exception: ") + error.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += outcome.pass ? 0 : 1;
    std::printf("%s %2zu %-24s %s [%.1fs]\n", outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                outcome.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
