// Command-line front end: data generation, query runs with cost reports, the reference oracle, the elasticity
// sweep and result-cache maintenance. Simulator state (objects and key-value tables) persists in a directory.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "skylite/bench/datagen.hpp"
#include "skylite/bench/oracle.hpp"
#include "skylite/bench/result_reader.hpp"
#include "skylite/bench/run_report.hpp"
#include "skylite/bench/sweep.hpp"
#include "skylite/bench/tpch_queries.hpp"
#include "skylite/common/errors.hpp"
#include "skylite/execution/coordinator.hpp"

namespace fs = std::filesystem;
using namespace skylite;

namespace {

struct CommonFlags {
  std::string state_dir = ".skylite";
  std::string config_file;
  std::string fault_plan;
  bool json = false;
};

SimConfig LoadConfig(const CommonFlags& flags) {
  SimConfig config = SimConfig::Defaults();
  std::string path = flags.config_file;
  if (path.empty()) {
    if (const char* env = std::getenv("SKYLITE_CONFIG")) path = env;
  }
  if (!path.empty()) config = SimConfig::LoadFile(path, config);
  if (!flags.fault_plan.empty()) config = SimConfig::LoadFile(flags.fault_plan, config);
  return config;
}

fs::path CatalogPath(const CommonFlags& flags) { return fs::path(flags.state_dir) / "catalog.json"; }

Catalog LoadCatalog(const CommonFlags& flags) {
  const fs::path path = CatalogPath(flags);
  if (!fs::exists(path)) Fail(ErrorCode::kInvalidArgument, "no data in " + flags.state_dir + "; run datagen first");
  return Catalog::Load(path);
}

std::string QueryText(const std::string& sql, int tpch) {
  if (!sql.empty() && tpch != 0) Fail(ErrorCode::kInvalidArgument, "give either --sql or --tpch");
  if (tpch != 0) return TpchQuery(tpch);
  if (sql.empty()) Fail(ErrorCode::kInvalidArgument, "missing --sql or --tpch");
  return sql;
}

// Distinct query id prefixes for processes sharing one state directory.
std::string QueryIdPrefix(Simulator& sim) {
  const auto records = sim.KvScan({sim.Now(), kClientTag}, kQueryTable);
  return "r" + std::to_string(records.size()) + "-q";
}

int RunDatagen(const CommonFlags& flags, double scale_factor, uint64_t seed, uint64_t file_mib) {
  Simulator sim(LoadConfig(flags));
  fs::create_directories(flags.state_dir);
  sim.AttachStateDirectory(flags.state_dir);
  const Catalog previous = fs::exists(CatalogPath(flags)) ? Catalog::Load(CatalogPath(flags)) : Catalog();
  DataGenSpec spec;
  spec.scale_factor = scale_factor;
  spec.seed = seed;
  spec.target_file_bytes = file_mib * kMiB;
  const Catalog catalog = GenerateTpch(sim, spec, previous);
  catalog.Save(CatalogPath(flags));
  nlohmann::json manifest = nlohmann::json::array();
  for (const auto& name : catalog.TableNames()) {
    const auto& table = catalog.Resolve(name);
    manifest.push_back({{"table", name},
                        {"rows", table.TotalRows()},
                        {"bytes", table.TotalBytes()},
                        {"objects", table.objects.size()},
                        {"version", table.version}});
  }
  if (flags.json) {
    std::cout << manifest.dump(2) << '\n';
  } else {
    for (const auto& entry : manifest) {
      std::cout << entry["table"].get<std::string>() << ": " << entry["rows"] << " rows, " << entry["bytes"]
                << " bytes in " << entry["objects"] << " objects (version " << entry["version"] << ")\n";
    }
  }
  return 0;
}

struct RunFlags {
  std::string sql;
  int tpch = 0;
  int repeat = 1;
  bool no_cache = false;
  int concurrency = 1;
  int workers = 0;
  bool show_rows = false;
};

int RunQueries(const CommonFlags& flags, const RunFlags& run) {
  const std::string sql = QueryText(run.sql, run.tpch);
  const Catalog catalog = LoadCatalog(flags);
  Simulator sim(LoadConfig(flags));
  sim.AttachStateDirectory(flags.state_dir);
  QueryOptions options;
  options.use_cache = !run.no_cache;
  options.query_id_prefix = QueryIdPrefix(sim);
  if (run.workers > 0) options.planner.force_workers = run.workers;
  Coordinator coordinator(sim, catalog, options);

  std::vector<RunReport> reports;
  QueryResult last;
  for (int i = 0; i < std::max(1, run.repeat); ++i) {
    const size_t mark = sim.LedgerSize();
    const auto results = coordinator.RunConcurrent(std::vector<std::string>(std::max(1, run.concurrency), sql));
    // Concurrent queries share the ledger slice; each report only counts its own tag.
    for (const auto& result : results) reports.push_back(MakeRunReport(sim, result, mark));
    last = results.back();
  }
  const RunReport median = MedianReport(reports);
  if (flags.json) {
    nlohmann::json out = median.ToJson();
    out["runs"] = reports.size();
    nlohmann::json latencies = nlohmann::json::array();
    for (const auto& report : reports) latencies.push_back(report.latency_ms);
    out["latencies_ms"] = latencies;
    if (run.show_rows) {
      const RecordBatch rows = FetchResult(sim, last);
      nlohmann::json row_list = nlohmann::json::array();
      for (size_t r = 0; r < rows.NumRows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& value : rows.Row(r)) row.push_back(value.ToJson());
        row_list.push_back(row);
      }
      out["rows"] = row_list;
    }
    std::cout << out.dump(2) << '\n';
  } else {
    if (reports.size() > 1) std::cout << "median of " << reports.size() << " runs\n";
    std::cout << median.ToText();
    if (run.show_rows) std::cout << '\n' << FormatTable(FetchResult(sim, last));
  }
  return 0;
}

int RunOracle(const CommonFlags& flags, const std::string& sql_flag, int tpch) {
  const std::string sql = QueryText(sql_flag, tpch);
  const Catalog catalog = LoadCatalog(flags);
  Simulator sim(LoadConfig(flags));
  sim.AttachStateDirectory(flags.state_dir);
  const RecordBatch rows = OracleQuery(sql, sim, catalog);
  if (flags.json) {
    nlohmann::json out = nlohmann::json::array();
    for (size_t r = 0; r < rows.NumRows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (const auto& value : rows.Row(r)) row.push_back(value.ToJson());
      out.push_back(row);
    }
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << FormatTable(rows);
  }
  return 0;
}

std::vector<double> ParseList(const std::string& text) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) values.push_back(std::stod(item));
  }
  return values;
}

int RunSweepCommand(const CommonFlags& flags, const std::string& sfs, const std::string& queries, uint64_t seed) {
  SweepOptions options;
  options.config = LoadConfig(flags);
  options.scale_factors = ParseList(sfs);
  options.queries.clear();
  for (double q : ParseList(queries)) options.queries.push_back(static_cast<int>(q));
  options.data.seed = seed;
  const auto rows = RunSweep(options);
  if (flags.json) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& row : rows) {
      nlohmann::json runs = nlohmann::json::array();
      for (const auto& run : row.runs) {
        runs.push_back({{"query", run.query},
                        {"latency_ms", run.latency_ms},
                        {"cost_cents", run.cost_cents},
                        {"invocations", run.invocations},
                        {"retriggers", run.retriggers},
                        {"max_fragments", run.max_fragments}});
      }
      out.push_back({{"sf", row.scale_factor},
                     {"data_bytes", row.data_bytes},
                     {"latency_ms", row.latency_ms},
                     {"cost_cents", row.cost_cents},
                     {"runs", runs}});
    }
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << FormatSweep(rows);
  }
  return 0;
}

int RunCache(const CommonFlags& flags, bool clear) {
  Simulator sim(LoadConfig(flags));
  fs::create_directories(flags.state_dir);
  sim.AttachStateDirectory(flags.state_dir);
  ResultRegistry registry(sim);
  if (clear) {
    const size_t count = registry.List({sim.Now(), kClientTag}).size();
    registry.Clear();
    std::cout << "removed " << count << " registry entries\n";
    return 0;
  }
  const auto entries = registry.List({sim.Now(), kClientTag});
  if (flags.json) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [key, entry] : entries) out.push_back({{"key", key}, {"entry", entry.ToJson()}});
    std::cout << out.dump(2) << '\n';
    return 0;
  }
  for (const auto& [key, entry] : entries) {
    std::cout << key << "  pipeline " << entry.pipeline_id << "  objects " << entry.OutputKeys().size()
              << "  query " << entry.creator_query << '\n';
  }
  std::cout << entries.size() << " entries\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skylite: serverless SQL over a simulated function platform and object store"};
  app.require_subcommand(1);
  CommonFlags flags;
  app.add_option("--state", flags.state_dir, "directory holding simulated objects and key-value tables");
  app.add_option("--config", flags.config_file, "price/latency config file (fallback: $SKYLITE_CONFIG)");
  app.add_option("--fault-plan", flags.fault_plan, "fault injection config file (fault.* keys)");
  app.add_flag("--json", flags.json, "machine-readable output");

  double scale_factor = 0.01;
  uint64_t seed = 1;
  uint64_t file_mib = 8;
  auto* datagen = app.add_subcommand("datagen", "generate TPC-H lineitem and orders");
  datagen->add_option("--sf", scale_factor, "scale factor")->check(CLI::PositiveNumber);
  datagen->add_option("--seed", seed, "generator seed");
  datagen->add_option("--file-mib", file_mib, "target object size")->check(CLI::PositiveNumber);

  RunFlags run;
  auto* run_cmd = app.add_subcommand("run", "execute a query and print its report");
  run_cmd->add_option("--sql", run.sql, "query text");
  run_cmd->add_option("--tpch", run.tpch, "TPC-H query number (1, 6, 12)");
  run_cmd->add_option("--repeat", run.repeat, "runs; the median-latency report is printed")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--no-cache", run.no_cache, "do not consult the result registry");
  run_cmd->add_option("--concurrency", run.concurrency, "simultaneous copies of the query")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--workers", run.workers, "force the worker count of scan and join pipelines");
  run_cmd->add_flag("--rows", run.show_rows, "print the result rows");

  std::string oracle_sql;
  int oracle_tpch = 0;
  auto* oracle = app.add_subcommand("oracle", "evaluate a query with the single-threaded reference executor");
  oracle->add_option("--sql", oracle_sql, "query text");
  oracle->add_option("--tpch", oracle_tpch, "TPC-H query number (1, 6, 12)");

  std::string sweep_sfs = "0.001,0.01,0.1,1";
  std::string sweep_queries = "1,6";
  auto* sweep = app.add_subcommand("sweep", "cold Q1+Q6 latency and cost across scale factors");
  sweep->add_option("--sf", sweep_sfs, "comma-separated scale factors");
  sweep->add_option("--queries", sweep_queries, "comma-separated TPC-H query numbers");
  sweep->add_option("--seed", seed, "generator seed");

  auto* cache = app.add_subcommand("cache", "inspect or clear the result registry");
  cache->require_subcommand(1);
  auto* cache_clear = cache->add_subcommand("clear", "remove every registry entry");
  cache->add_subcommand("list", "list registry entries");

  app.add_subcommand("config", "print the effective simulator configuration as a config file");

  CLI11_PARSE(app, argc, argv);
  try {
    if (app.got_subcommand("config")) {
      std::cout << LoadConfig(flags).ToConfigText();
      return 0;
    }
    if (datagen->parsed()) return RunDatagen(flags, scale_factor, seed, file_mib);
    if (run_cmd->parsed()) return RunQueries(flags, run);
    if (oracle->parsed()) return RunOracle(flags, oracle_sql, oracle_tpch);
    if (sweep->parsed()) return RunSweepCommand(flags, sweep_sfs, sweep_queries, seed);
    if (cache->parsed()) return RunCache(flags, cache_clear->parsed());
  } catch (const SkyliteError& error) {
    // The message starts with the error code name.
    std::cerr << "error: " << error.what() << '\n';
    return 2;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << '\n';
    return 2;
  }
  return 1;
}
