#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "warnsim/metrics/metrics.hpp"
#include "warnsim/scenario/run.hpp"

namespace warnsim::scenario {

/// Cross-seed statistic of one metric for one (protocol, variant, density) group.
struct AggregateRow {
  std::string protocol;
  std::string variant;
  double density = 0.0;
  std::string ring;    // ring upper bound, or "all"
  std::string metric;
  metrics::CiSummary ci;  // half_width is NaN with fewer than two runs
};

std::vector<AggregateRow> aggregate(const ScenarioConfig& cfg, std::span<const RunResult> runs);

/// Looks up the aggregate mean; NaN when absent.
const AggregateRow* find_row(std::span<const AggregateRow> rows, std::string_view protocol,
                             std::string_view variant, double density, std::string_view ring,
                             std::string_view metric);

std::string format_number(double v);

std::string table_csv(std::span<const AggregateRow> rows);
std::string series_csv(const ScenarioConfig& cfg, std::span<const RunResult> runs);
std::string summary_json(const ScenarioConfig& cfg, std::span<const RunResult> runs,
                         std::span<const AggregateRow> rows);

/// Writes <out>/<name>_table.csv, <name>_summary.json and <name>_series.csv.
/// Returns the written paths.
std::vector<std::filesystem::path> write_reports(const ScenarioConfig& cfg,
                                                 std::span<const RunResult> runs,
                                                 const std::filesystem::path& out_dir);

}  // namespace warnsim::scenario
