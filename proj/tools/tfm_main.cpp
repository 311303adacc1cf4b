#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tfm/report.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfigError = 2;

int jobs_from_env() {
  const char* env = std::getenv("TFM_JOBS");
  if (!env) return 0;
  int v = std::atoi(env);
  return v > 0 ? v : 0;
}

std::vector<double> parse_profile_literal(const std::string& text) {
  std::string body;
  for (char c : text) {
    if (c == '(' || c == ')' || c == ' ' || c == '\t') continue;
    body += c;
  }
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t comma = body.find(',', pos);
    std::string tok = body.substr(pos, comma == std::string::npos ? std::string::npos
                                                                  : comma - pos);
    if (!tok.empty()) {
      char* end = nullptr;
      double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') {
        throw tfm::ConfigError("profile literal: bad number \"" + tok + "\"");
      }
      out.push_back(v);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string joined_path(const std::string& dir, const std::string& leaf) {
  if (dir.empty()) return leaf;
  return (std::filesystem::path(dir) / leaf).string();
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = -1;  // -1: env/default
};

tfm::ExperimentConfig load_config(const CommonArgs& args) {
  tfm::ExperimentConfig cfg = tfm::parse_config_file(args.config_path);
  if (args.seed_set) cfg.seed = args.seed;
  return cfg;
}

tfm::ExecPolicy exec_policy(const CommonArgs& args) {
  int jobs = args.jobs >= 0 ? args.jobs : jobs_from_env();
  return tfm::ExecPolicy{jobs};
}

int cmd_check(const CommonArgs& args) {
  tfm::ExperimentConfig cfg = load_config(args);
  tfm::RunResult result = tfm::run_checks(cfg, exec_policy(args));
  for (const std::string& w : result.warnings) {
    std::fprintf(stderr, "warning: %s\n", w.c_str());
  }
  std::string failing;
  for (const auto& run : result.runs) {
    std::printf("[%s] %s (%.3fs)\n", tfm::to_string(run.report.status),
                run.report.check_name.c_str(), run.wall_seconds);
    if (run.report.status != tfm::CheckStatus::Pass && failing.empty()) {
      failing = run.report.check_name;
    }
  }
  const std::string report_path = joined_path(args.out_dir, cfg.report_path);
  tfm::write_text_file(report_path, tfm::run_report_json(cfg, result).dump(2) + "\n");
  std::printf("report: %s\n", report_path.c_str());
  if (!failing.empty()) {
    std::fprintf(stderr, "check failed: %s\n", failing.c_str());
    return kExitCheckFailure;
  }
  return kExitPass;
}

int cmd_plot_data(const CommonArgs& args) {
  tfm::ExperimentConfig cfg = load_config(args);
  const std::string dir = joined_path(args.out_dir, cfg.plot_dir);
  for (const std::string& f : tfm::write_plot_data(cfg, dir)) {
    std::printf("wrote %s\n", f.c_str());
  }
  return kExitPass;
}

int cmd_deviate(const CommonArgs& args, const std::string& profile_literal) {
  tfm::ExperimentConfig cfg = load_config(args);
  std::vector<double> bids = parse_profile_literal(profile_literal);
  std::sort(bids.begin(), bids.end(), std::greater<double>());

  tfm::DeviationSearchConfig search;
  for (const auto& entry : cfg.checks) {
    if (auto* spec = std::get_if<tfm::DeviationCheckSpec>(&entry.params)) {
      search = spec->cfg;  // reuse the config's search budgets
      break;
    }
  }
  tfm::DeviationReport best =
      tfm::deviation_search(cfg.mechanism, cfg.distribution, tfm::BidProfile(bids), search);
  std::printf("%s\n", tfm::deviation_report_json(best).dump(2).c_str());
  return kExitPass;
}

}  // namespace

int run_main(int argc, char** argv);

int main(int argc, char** argv) {
  try {
    return run_main(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fatal: %s\n", e.what());
    return kExitCheckFailure;
  }
}

int run_main(int argc, char** argv) {
  CLI::App app{"transaction fee mechanism checker"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string profile_literal;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", args.config_path, "experiment config file")->required();
    cmd->add_option("--out", args.out_dir, "output directory prefix");
    cmd->add_option("--seed", args.seed, "override the config seed")
        ->each([&](const std::string&) { args.seed_set = true; });
    cmd->add_option("--jobs", args.jobs, "worker count (1 = serial reference)");
  };

  CLI::App* check = app.add_subcommand("check", "run the configured checks");
  add_common(check);
  CLI::App* plot = app.add_subcommand("plot-data", "emit CSV plot data");
  add_common(plot);
  CLI::App* deviate = app.add_subcommand("deviate", "search deviations for a bid profile");
  add_common(deviate);
  deviate->add_option("--profile", profile_literal, "bid profile literal, e.g. \"(6,5)\"")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return cmd_check(args);
    if (plot->parsed()) return cmd_plot_data(args);
    if (deviate->parsed()) return cmd_deviate(args, profile_literal);
  } catch (const tfm::ConfigError& e) {
    if (e.line() >= 0) {
      std::fprintf(stderr, "error: %s (line %d, column %d)\n", e.what(), e.line(), e.column());
      return kExitConfigError;
    }
    // Budget-style errors (an oversized deviation profile) are check errors,
    // not config errors.
    const std::string msg = e.what();
    if (msg.find("profile too large") != std::string::npos) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return kExitCheckFailure;
    }
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitCheckFailure;
  }
  return kExitPass;
}
