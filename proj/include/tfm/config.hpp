#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tfm/dist.hpp"
#include "tfm/mech.hpp"
#include "tfm/verify.hpp"

namespace tfm {

using OrderedJson = nlohmann::ordered_json;

// Check entries beyond the plain verify parameter structs.

struct DeviationCheckSpec {
  std::vector<double> bids;
  DeviationSearchConfig cfg;
  double tol = 1e-9;
};

struct MistuningCheckSpec {
  double price = 0.0;
  double burn = 0.0;
  std::size_t samples = 100000;
  double tol = 1e-9;
};

struct McRevenueCheckSpec {
  std::size_t n = 2;
  std::size_t samples = 100000;
};

struct IncreasingBurnCheckSpec {
  std::vector<double> betas;
  double eps = 0.1;
};

struct DecreasingBurnCheckSpec {
  double base = 2.0;
  double coeff = 1.0;  // beta_t = base + coeff / t
  std::size_t n_cap = 1000;
};

struct SmoothnessCheckSpec {};

using CheckParams =
    std::variant<MirParams, OncusParams, OncmsPositionParams, OncmsGenposParams,
                 DeviationCheckSpec, MistuningCheckSpec, McRevenueCheckSpec, GscpParams,
                 IncreasingBurnCheckSpec, DecreasingBurnCheckSpec, SmoothnessCheckSpec>;

struct CheckEntry {
  std::string name;
  CheckParams params;
  bool seed_overridden = false;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::uint64_t seed = kDefaultBaseSeed;
  Distribution distribution = Distribution::exponential(1.0);
  MechanismSpec mechanism;
  std::vector<CheckEntry> checks;
  std::string report_path = "report.json";
  std::string plot_dir = "plots";
};

/// Parse and validate; throws ConfigError (with line/column for syntax
/// errors). All numeric fields are decimal strings; unknown keys reject.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_json(const OrderedJson& j);

/// The fully-resolved config (defaults materialized, numerics as decimal
/// strings); embedding this in a report makes the run reproducible.
OrderedJson resolved_config_json(const ExperimentConfig& cfg);

/// 17-significant-digit decimal string (the config/CSV number format).
std::string format_decimal(double v);

}  // namespace tfm
