#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tfm/config.hpp"
#include "tfm/report.hpp"

using namespace tfm;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  auto dir = std::filesystem::temp_directory_path() / "tfm_tests";
  std::filesystem::create_directories(dir);
  auto path = (dir / name).string();
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kGoodConfig = R"({
  "schema_version": "1",
  "seed": "24069",
  "distribution": {"kind": "exponential", "mean": "1"},
  "mechanism": {
    "family": "posted_price",
    "objective_space": "virtual",
    "capacity": "infinite",
    "price": "2",
    "burn_per_user": "1",
    "route": "miner"
  },
  "checks": [
    {"name": "mir_conditions", "n_list": ["1", "2"], "samples": "400"},
    {"name": "oncus", "n": "2", "samples": "100", "grid": "16"},
    {"name": "mc_revenue", "n": "1", "samples": "20000"}
  ],
  "output": {"report": "report.json", "plot_data_dir": "plots"}
})";

struct RunResultText {
  int exit_code = -1;
  std::string output;
};

RunResultText run_cli(const std::string& args) {
  RunResultText res;
  std::string cmd = std::string(TFM_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[512];
  while (fgets(buf, sizeof(buf), pipe)) res.output += buf;
  int status = pclose(pipe);
  res.exit_code = WEXITSTATUS(status);
  return res;
}

}  // namespace

TEST_CASE("config parses with decimal-string numerics and strict keys") {
  ExperimentConfig cfg = parse_config_text(kGoodConfig);
  CHECK(cfg.seed == 24069);
  CHECK(cfg.distribution.kind() == Distribution::Kind::Exponential);
  CHECK(cfg.mechanism.as<PostedPriceBurn>() != nullptr);
  CHECK(cfg.checks.size() == 3);

  // Unknown keys are rejected everywhere.
  CHECK_THROWS_AS(parse_config_text(R"({"distribution": {"kind": "exponential"},
    "mechanism": {"family": "posted_price", "price": "2"}, "extra": "1"})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"distribution": {"kind": "exponential", "mu": "1"},
    "mechanism": {"family": "posted_price", "price": "2"}})"),
                  ConfigError);

  // Raw JSON numbers are not accepted: decimals ride in strings.
  CHECK_THROWS_AS(parse_config_text(R"({"distribution": {"kind": "exponential", "mean": 1},
    "mechanism": {"family": "posted_price", "price": "2"}})"),
                  ConfigError);

  // Missing required blocks.
  CHECK_THROWS_AS(parse_config_text(R"({"mechanism": {"family": "posted_price", "price": "2"}})"),
                  ConfigError);

  // Malformed JSON carries line/column.
  try {
    parse_config_text("{\n  \"distribution\": {,}\n}");
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() > 0);
  }
}

TEST_CASE("alias kind and piecewise parse") {
  ExperimentConfig a = parse_config_text(R"({
    "distribution": {"kind": "appendix_c2", "epsilon": "0.1"},
    "mechanism": {"family": "deterministic_schedule", "marginal_burns": ["2.1", "0"],
                  "tail": "constant_last"}
  })");
  CHECK(a.distribution.kind() == Distribution::Kind::CappedPareto);

  ExperimentConfig b = parse_config_text(R"({
    "distribution": {"kind": "piecewise",
      "pieces": [{"lo": "0", "hi": "0.5", "density": "0.5"},
                 {"lo": "0.5", "hi": "1", "density": "1.5"}]},
    "mechanism": {"family": "posted_price", "price": "0.9"}
  })");
  CHECK(b.distribution.kind() == Distribution::Kind::PiecewiseDensity);
}

TEST_CASE("resolved config round-trips to itself") {
  ExperimentConfig cfg = parse_config_text(kGoodConfig);
  OrderedJson once = resolved_config_json(cfg);
  ExperimentConfig reparsed = parse_config_json(once);
  OrderedJson twice = resolved_config_json(reparsed);
  CHECK(once.dump() == twice.dump());
}

TEST_CASE("run reports are reproducible modulo timing") {
  ExperimentConfig cfg = parse_config_text(kGoodConfig);
  RunResult r1 = run_checks(cfg);
  RunResult r2 = run_checks(cfg);
  OrderedJson j1 = run_report_json(cfg, r1);
  OrderedJson j2 = run_report_json(cfg, r2);
  j1.erase("timing");
  j2.erase("timing");
  CHECK(j1.dump() == j2.dump());
  CHECK(r1.overall == CheckStatus::Pass);

  // Round-trip: the embedded config re-runs to the identical report.
  ExperimentConfig embedded = parse_config_json(j1["config"]);
  RunResult r3 = run_checks(embedded);
  OrderedJson j3 = run_report_json(embedded, r3);
  j3.erase("timing");
  CHECK(j3.dump() == j1.dump());
}

TEST_CASE("plot data: deterministic bytes and golden anchors") {
  ExperimentConfig cfg = parse_config_text(R"({
    "distribution": {"kind": "exponential", "mean": "1"},
    "mechanism": {"family": "deterministic_schedule", "marginal_burns": ["4", "3"],
                  "tail": "infinite"}
  })");
  auto dir1 = std::filesystem::temp_directory_path() / "tfm_tests" / "plots1";
  auto dir2 = std::filesystem::temp_directory_path() / "tfm_tests" / "plots2";
  auto files1 = write_plot_data(cfg, dir1.string());
  auto files2 = write_plot_data(cfg, dir2.string());
  REQUIRE(files1.size() == files2.size());
  for (std::size_t i = 0; i < files1.size(); ++i) {
    std::string c1 = read_file(files1[i]);
    CHECK(c1 == read_file(files2[i]));
    CHECK(c1.find('\r') == std::string::npos);  // LF endings only
  }

  // Region map: the (5,4) corner of the grid lies in the both-included region.
  auto cells = region_map(cfg.mechanism, cfg.distribution, 32, 0.0, 6.0);
  bool checked = false;
  for (const auto& cell : cells) {
    if (std::abs(cell.phi1 - 5.032258064516129) < 1e-9 &&
        std::abs(cell.phi2 - 4.064516129032258) < 1e-9) {
      CHECK(cell.label == 'A');
      checked = true;
    }
  }
  CHECK(checked);

  // Position-auction margins: the x_2 row carries 1/6.
  ExperimentConfig pos = parse_config_text(R"({
    "distribution": {"kind": "uniform", "lo": "0", "hi": "1"},
    "mechanism": {"family": "position_auction", "capacity": {"finite": "1"},
                  "weights": {"kind": "harmonic", "scale": "1"}, "marginal_burn": "0.6"}
  })");
  auto dir3 = std::filesystem::temp_directory_path() / "tfm_tests" / "plots3";
  auto files3 = write_plot_data(pos, dir3.string());
  std::string margins;
  for (const auto& f : files3) {
    if (f.find("oncms_margins") != std::string::npos) margins = read_file(f);
  }
  REQUIRE_FALSE(margins.empty());
  CHECK(margins.find("\n2,0.16666666666666666,") != std::string::npos);
}

TEST_CASE("cli end to end: exit codes and report files") {
  const std::string good = write_temp("good.json", kGoodConfig);
  auto outdir = std::filesystem::temp_directory_path() / "tfm_tests" / "out_good";
  RunResultText ok = run_cli("check --config " + good + " --out " + outdir.string());
  CHECK(ok.exit_code == 0);
  CHECK(ok.output.find("[pass] mir_conditions") != std::string::npos);
  CHECK(std::filesystem::exists(outdir / "report.json"));

  // A mistuned full-burn posted price fails the reduction conditions with an
  // entry-fee witness and exits 1.
  const std::string bad = write_temp("bad.json", R"({
    "seed": "7",
    "distribution": {"kind": "exponential", "mean": "1"},
    "mechanism": {"family": "posted_price", "price": "2", "burn_per_user": "2",
                  "route": "burn_all"},
    "checks": [{"name": "mir_conditions", "n_list": ["2"], "samples": "600"}]
  })");
  auto outbad = std::filesystem::temp_directory_path() / "tfm_tests" / "out_bad";
  RunResultText fail = run_cli("check --config " + bad + " --out " + outbad.string());
  CHECK(fail.exit_code == 1);
  CHECK(fail.output.find("check failed: mir_conditions") != std::string::npos);
  std::string report = read_file((outbad / "report.json").string());
  CHECK(report.find("entry-fee") != std::string::npos);

  // Malformed config: exit 2 with a line/column diagnostic.
  const std::string broken = write_temp("broken.json", "{\n  \"distribution\": {,}\n}");
  RunResultText parse = run_cli("check --config " + broken);
  CHECK(parse.exit_code == 2);
  CHECK(parse.output.find("line 2") != std::string::npos);

  // Missing distribution is also a config error.
  const std::string missing = write_temp("missing.json",
                                         R"({"mechanism": {"family": "posted_price",
                                             "price": "2"}})");
  CHECK(run_cli("check --config " + missing).exit_code == 2);

  // deviate: parses the literal, prints a deviation report.
  const std::string c1cfg = write_temp("c1.json", R"({
    "distribution": {"kind": "exponential", "mean": "1"},
    "mechanism": {"family": "deterministic_schedule", "marginal_burns": ["4", "3"],
                  "tail": "infinite"}
  })");
  RunResultText dev = run_cli("deviate --config " + c1cfg + " --profile \"(6,5)\"");
  CHECK(dev.exit_code == 0);
  CHECK(dev.output.find("\"delta\"") != std::string::npos);
  RunResultText devempty = run_cli("deviate --config " + c1cfg + " --profile \"()\"");
  CHECK(devempty.exit_code == 0);
  CHECK(devempty.output.find("compliant") != std::string::npos);

  // Oversized profiles exhaust the enumeration budget: exit 1.
  RunResultText toolarge =
      run_cli("deviate --config " + c1cfg +
              " --profile \"(13,12,11,10,9,8,7,6,5,4,3,2,1)\"");
  CHECK(toolarge.exit_code == 1);

  // plot-data writes the CSV set.
  auto plotdir = std::filesystem::temp_directory_path() / "tfm_tests" / "out_plot";
  RunResultText plot = run_cli("plot-data --config " + c1cfg + " --out " + plotdir.string());
  CHECK(plot.exit_code == 0);
  CHECK(std::filesystem::exists(plotdir / "plots" / "region_map.csv"));
}
