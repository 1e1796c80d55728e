#include "skylite/bench/sweep.hpp"

#include <iomanip>
#include <sstream>

#include "skylite/bench/tpch_queries.hpp"

namespace skylite {

std::vector<SweepRow> RunSweep(const SweepOptions& options) {
  std::vector<SweepRow> rows;
  for (const double scale_factor : options.scale_factors) {
    Simulator data_sim(options.config);
    DataGenSpec spec = options.data;
    spec.scale_factor = scale_factor;
    const Catalog catalog = GenerateTpch(data_sim, spec);
    SweepRow row;
    row.scale_factor = scale_factor;
    for (const auto& name : catalog.TableNames()) row.data_bytes += catalog.Resolve(name).TotalBytes();
    for (const int query : options.queries) {
      Simulator sim(options.config);
      sim.CopyObjectsFrom(data_sim);
      QueryOptions query_options = options.query;
      query_options.use_cache = false;
      Coordinator coordinator(sim, catalog, query_options);
      const QueryResult result = coordinator.Run(TpchQuery(query));
      SweepRun run;
      run.query = query;
      run.latency_ms = ToMillis(result.Latency());
      run.cost_cents = sim.TotalCost(std::nullopt, result.query_id);
      run.invocations = result.Invocations();
      run.retriggers = result.Retriggers();
      for (const auto& stage : result.stages) run.max_fragments = std::max(run.max_fragments, stage.fragments);
      row.latency_ms += run.latency_ms;
      row.cost_cents += run.cost_cents;
      row.runs.push_back(run);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string FormatSweep(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << std::fixed;
  out << "      sf    data_bytes  latency_ms  cost_cents  per-query (latency_ms/workers/retriggers)\n";
  for (const auto& row : rows) {
    out << std::setw(8) << std::setprecision(3) << row.scale_factor << std::setw(14) << row.data_bytes
        << std::setw(12) << std::setprecision(1) << row.latency_ms << std::setw(12) << std::setprecision(5)
        << row.cost_cents << "  ";
    for (const auto& run : row.runs) {
      out << " Q" << run.query << "=" << std::setprecision(1) << run.latency_ms << "/" << run.max_fragments << "/"
          << run.retriggers;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace skylite
