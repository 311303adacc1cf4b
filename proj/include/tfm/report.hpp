#pragma once

#include <string>
#include <vector>

#include "tfm/config.hpp"
#include "tfm/verify.hpp"

namespace tfm {

struct CheckRun {
  CheckReport report;
  double wall_seconds = 0.0;
};

struct RunResult {
  std::vector<CheckRun> runs;
  CheckStatus overall = CheckStatus::Pass;
  std::vector<std::string> warnings;  // mechanism validation warnings
};

/// Execute every configured check. Seeds derive from the config seed through
/// per-check named streams unless an entry pins its own.
RunResult run_checks(const ExperimentConfig& cfg, ExecPolicy exec = {});

OrderedJson deviation_report_json(const DeviationReport& r);
OrderedJson check_report_json(const CheckReport& r);

/// Full run report: schema version, resolved config, per-check reports and a
/// summary. Timing lives under its own key so reproducibility comparisons
/// can drop it; everything else is byte-stable for fixed config and seeds.
OrderedJson run_report_json(const ExperimentConfig& cfg, const RunResult& result);

void write_text_file(const std::string& path, const std::string& content);

/// Deterministic CSV plot data: own-bid allocation curves per rank, the burn
/// schedule, the two-user region map (for schedules), and the rank-t miner
/// simplicity margins (for bounded-prior position auctions). 17 significant
/// digits, LF line endings, fixed column order.
std::vector<std::string> write_plot_data(const ExperimentConfig& cfg, const std::string& dir);

/// Two-user region map rows over a phi-grid: labels A (both included),
/// B (only the first), C (only the second), D (empty block).
struct RegionCell {
  double phi1 = 0.0;
  double phi2 = 0.0;
  char label = 'D';
};
std::vector<RegionCell> region_map(const MechanismSpec& m, const Distribution& d,
                                   std::size_t grid, double phi_lo, double phi_hi);

}  // namespace tfm
