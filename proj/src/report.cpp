#include "tfm/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace tfm {

namespace {

CheckReport wrap_deviation_check(const MechanismSpec& m, const Distribution& d,
                                 const DeviationCheckSpec& spec) {
  CheckReport rep;
  rep.check_name = "deviation_search";
  DeviationReport best = deviation_search(m, d, BidProfile(spec.bids), spec.cfg);
  ConditionResult cond;
  cond.name = "no_profitable_deviation";
  cond.trials = 1;
  cond.worst_margin = -best.delta;
  if (best.delta > spec.tol) {
    cond.status = CheckStatus::Fail;
    cond.violations = 1;
    cond.witnesses.push_back(best);
  } else if (!best.note.empty() && best.note.find("partial") != std::string::npos) {
    cond.status = CheckStatus::Inconclusive;
    cond.note = best.note;
  } else {
    cond.status = CheckStatus::Pass;
    cond.note = best.note;
  }
  rep.conditions.push_back(std::move(cond));
  rep.finalize();
  return rep;
}

CheckReport wrap_mistuning_check(const Distribution& d, const MistuningCheckSpec& spec,
                                 std::uint64_t seed, ExecPolicy exec) {
  CheckReport rep;
  rep.check_name = "mistuning";
  rep.seed = seed;
  MistuningReport mr = posted_price_mistuning(d, spec.price, spec.burn, spec.samples, seed, exec);

  ConditionResult tuned;
  tuned.name = "tuned_burn";
  tuned.trials = 1;
  tuned.worst_margin = -mr.delta_quadrature;
  if (mr.kind == DeviationKind::Compliant || mr.delta_quadrature <= spec.tol) {
    tuned.status = CheckStatus::Pass;
    tuned.note = "burn equals the virtual value at the price";
  } else {
    tuned.status = CheckStatus::Fail;
    tuned.violations = 1;
    DeviationReport wit;
    wit.kind = mr.kind;
    wit.metric = "expected_revenue_per_user";
    wit.delta = mr.delta_quadrature;
    wit.revenue_after = mr.delta_quadrature;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "off-chain %s of %.9g per user recovers %.9g expected revenue "
                  "(mc %.9g +/- %.3g)",
                  mr.kind == DeviationKind::EntryFee ? "entry fee" : "rebate", mr.offchain_fee,
                  mr.delta_quadrature, mr.delta_mc, mr.mc_stderr);
    wit.note = buf;
    tuned.witnesses.push_back(std::move(wit));
  }
  rep.conditions.push_back(std::move(tuned));

  ConditionResult agree;
  agree.name = "quadrature_mc_agreement";
  agree.trials = spec.samples;
  if (mr.kind == DeviationKind::Compliant || spec.samples == 0) {
    agree.status = CheckStatus::Pass;
    agree.worst_margin = 0.0;
  } else {
    const double gap = std::abs(mr.delta_quadrature - mr.delta_mc);
    agree.worst_margin = 3.0 * mr.mc_stderr - gap;
    agree.status = agree.worst_margin >= 0.0 ? CheckStatus::Pass : CheckStatus::Fail;
  }
  rep.conditions.push_back(std::move(agree));
  rep.finalize();
  return rep;
}

CheckReport wrap_mc_revenue(const MechanismSpec& m, const Distribution& d,
                            const McRevenueCheckSpec& spec, std::uint64_t seed,
                            ExecPolicy exec) {
  CheckReport rep;
  rep.check_name = "mc_revenue";
  rep.seed = seed;
  RevenueEquivalenceReport rr = mc_revenue_equivalence(m, d, spec.n, spec.samples, seed, exec);
  ConditionResult cond;
  cond.name = "revenue_equivalence";
  cond.trials = spec.samples;
  cond.worst_margin = 3.0 * rr.diff_stderr - std::abs(rr.diff_mean);
  cond.status = rr.pass ? CheckStatus::Pass : CheckStatus::Fail;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "E[payments]=%.9g, E[virtual surplus]=%.9g, z=%.3f", rr.payment_mean,
                rr.virtual_surplus_mean, rr.z_score);
  cond.note = buf;
  if (!rr.pass) {
    cond.violations = 1;
    DeviationReport wit;
    wit.kind = DeviationKind::OffchainCoerce;
    wit.metric = "revenue_equivalence_gap";
    wit.delta = rr.diff_mean;
    wit.note = buf;
    cond.witnesses.push_back(std::move(wit));
  }
  rep.conditions.push_back(std::move(cond));
  rep.finalize();
  return rep;
}

CheckReport wrap_counterexample(const std::string& name, DeviationReport dev) {
  CheckReport rep;
  rep.check_name = name;
  ConditionResult cond;
  cond.name = "construction";
  cond.trials = 1;
  if (!dev.applicable) {
    cond.status = CheckStatus::Pass;
    cond.note = dev.note;
  } else if (dev.delta > 0.0) {
    cond.status = CheckStatus::Pass;
    cond.worst_margin = dev.delta;
    cond.note = "profitable deviation constructed and replayed";
    cond.witnesses.push_back(std::move(dev));
  } else {
    cond.status = CheckStatus::Inconclusive;
    cond.note = dev.note;
  }
  rep.conditions.push_back(std::move(cond));
  rep.finalize();
  return rep;
}

CheckReport wrap_smoothness(const Distribution& d) {
  CheckReport rep;
  rep.check_name = "smoothness";
  SmoothnessReport sr = d.smoothness_check();
  ConditionResult cond;
  cond.name = "advisory";
  cond.trials = 1;
  cond.status = CheckStatus::Pass;  // advisory only
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "continuous_phi=%s prob_nonpos_vv=%.9g smooth=%s max_jump=%.9g jump_at=%.9g "
                "atom_at_sup=%s",
                sr.continuous_phi ? "true" : "false", sr.prob_nonpos_vv,
                sr.smooth ? "true" : "false", sr.max_jump, sr.jump_at,
                sr.has_atom_at_sup ? "true" : "false");
  cond.note = buf;
  rep.conditions.push_back(std::move(cond));
  rep.finalize();
  return rep;
}

}  // namespace

RunResult run_checks(const ExperimentConfig& cfg, ExecPolicy exec) {
  RunResult result;
  result.warnings = cfg.mechanism.validate(cfg.distribution);

  for (std::size_t idx = 0; idx < cfg.checks.size(); ++idx) {
    const CheckEntry& entry = cfg.checks[idx];
    const std::uint64_t seed =
        entry.seed_overridden ? entry.seed : stream_seed(cfg.seed, entry.name, idx);
    const auto start = std::chrono::steady_clock::now();

    CheckReport report = std::visit(
        [&](const auto& p) -> CheckReport {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, MirParams>) {
            MirParams mp = p;
            mp.seed = seed;
            return check_mir_conditions(cfg.mechanism, cfg.distribution, mp, exec);
          } else if constexpr (std::is_same_v<T, OncusParams>) {
            OncusParams op = p;
            op.seed = seed;
            return check_oncus(cfg.mechanism, cfg.distribution, op, exec);
          } else if constexpr (std::is_same_v<T, OncmsPositionParams>) {
            return check_oncms_position(cfg.mechanism, cfg.distribution, p);
          } else if constexpr (std::is_same_v<T, OncmsGenposParams>) {
            return check_oncms_genpos(cfg.mechanism, cfg.distribution, p);
          } else if constexpr (std::is_same_v<T, DeviationCheckSpec>) {
            return wrap_deviation_check(cfg.mechanism, cfg.distribution, p);
          } else if constexpr (std::is_same_v<T, MistuningCheckSpec>) {
            return wrap_mistuning_check(cfg.distribution, p, seed, exec);
          } else if constexpr (std::is_same_v<T, McRevenueCheckSpec>) {
            return wrap_mc_revenue(cfg.mechanism, cfg.distribution, p, seed, exec);
          } else if constexpr (std::is_same_v<T, GscpParams>) {
            GscpParams gp = p;
            gp.seed = seed;
            return check_gscp(cfg.mechanism, cfg.distribution, gp, exec);
          } else if constexpr (std::is_same_v<T, IncreasingBurnCheckSpec>) {
            return wrap_counterexample(
                "increasing_marginal_burn",
                increasing_marginal_burn_deviation(cfg.distribution, p.betas, p.eps));
          } else if constexpr (std::is_same_v<T, DecreasingBurnCheckSpec>) {
            const double base = p.base, coeff = p.coeff;
            return wrap_counterexample(
                "decreasing_marginal_burn",
                decreasing_marginal_burn_deviation(
                    cfg.distribution,
                    [base, coeff](std::size_t t) {
                      return base + coeff / static_cast<double>(t);
                    },
                    p.n_cap));
          } else {
            static_assert(std::is_same_v<T, SmoothnessCheckSpec>);
            return wrap_smoothness(cfg.distribution);
          }
        },
        entry.params);

    if (report.seed == 0) report.seed = seed;
    const auto end = std::chrono::steady_clock::now();
    CheckRun run;
    run.report = std::move(report);
    run.wall_seconds = std::chrono::duration<double>(end - start).count();
    result.runs.push_back(std::move(run));
  }

  result.overall = CheckStatus::Pass;
  for (const auto& r : result.runs) {
    if (r.report.status == CheckStatus::Fail) {
      result.overall = CheckStatus::Fail;
      break;
    }
    if (r.report.status == CheckStatus::Inconclusive) result.overall = CheckStatus::Inconclusive;
  }
  return result;
}

OrderedJson deviation_report_json(const DeviationReport& r) {
  OrderedJson j;
  j["kind"] = to_string(r.kind);
  j["metric"] = r.metric;
  j["original_bids"] = r.original_bids;
  j["manipulated_bids"] = r.manipulated_bids;
  j["fabricated_bids"] = r.fabricated_bids;
  j["censored_ranks"] = r.censored_ranks;
  j["revenue_before"] = r.revenue_before;
  j["revenue_after"] = r.revenue_after;
  j["delta"] = r.delta;
  j["applicable"] = r.applicable;
  j["note"] = r.note;
  return j;
}

OrderedJson check_report_json(const CheckReport& r) {
  OrderedJson j;
  j["check"] = r.check_name;
  j["status"] = to_string(r.status);
  j["seed"] = std::to_string(r.seed);
  j["note"] = r.note;
  OrderedJson conds = OrderedJson::array();
  for (const auto& c : r.conditions) {
    OrderedJson cj;
    cj["name"] = c.name;
    cj["status"] = to_string(c.status);
    cj["worst_margin"] = std::isfinite(c.worst_margin) ? OrderedJson(c.worst_margin)
                                                       : OrderedJson("inf");
    cj["violations"] = c.violations;
    cj["trials"] = c.trials;
    cj["note"] = c.note;
    OrderedJson wits = OrderedJson::array();
    for (const auto& w : c.witnesses) wits.push_back(deviation_report_json(w));
    cj["witnesses"] = wits;
    conds.push_back(cj);
  }
  j["conditions"] = conds;
  return j;
}

OrderedJson run_report_json(const ExperimentConfig& cfg, const RunResult& result) {
  OrderedJson j;
  j["schema_version"] = "1";
  j["config"] = resolved_config_json(cfg);
  std::size_t passed = 0;
  OrderedJson checks = OrderedJson::array();
  for (const auto& r : result.runs) {
    checks.push_back(check_report_json(r.report));
    if (r.report.status == CheckStatus::Pass) ++passed;
  }
  j["checks"] = checks;
  j["warnings"] = result.warnings;
  j["summary"] = OrderedJson{{"status", to_string(result.overall)},
                             {"checks_total", result.runs.size()},
                             {"checks_passed", passed}};
  OrderedJson timing;
  double total = 0.0;
  OrderedJson per = OrderedJson::array();
  for (const auto& r : result.runs) {
    per.push_back(r.wall_seconds);
    total += r.wall_seconds;
  }
  timing["per_check_seconds"] = per;
  timing["total_seconds"] = total;
  j["timing"] = timing;
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);  // binary: LF endings everywhere
  if (!out) throw ConfigError("cannot write " + path);
  out << content;
}

// ---------------------------------------------------------------------------
// Plot data
// ---------------------------------------------------------------------------

std::vector<RegionCell> region_map(const MechanismSpec& m, const Distribution& d,
                                   std::size_t grid, double phi_lo, double phi_hi) {
  std::vector<RegionCell> cells;
  cells.reserve(grid * grid);
  for (std::size_t i = 0; i < grid; ++i) {
    for (std::size_t k = 0; k < grid; ++k) {
      RegionCell cell;
      cell.phi1 = phi_lo + (phi_hi - phi_lo) * static_cast<double>(i) /
                               static_cast<double>(grid - 1);
      cell.phi2 = phi_lo + (phi_hi - phi_lo) * static_cast<double>(k) /
                               static_cast<double>(grid - 1);
      double v1 = d.inverse_virtual_value(std::min(cell.phi1, d.phi_at_sup()));
      double v2 = d.inverse_virtual_value(std::min(cell.phi2, d.phi_at_sup()));
      std::vector<double> bids{v1, v2};
      auto out = allocate(m, d, BidProfile(bids));
      // Map rank allocation back to the (phi1, phi2) users; the larger phi
      // holds rank 0. Ties are interchangeable.
      bool a1, a2;
      if (v1 >= v2) {
        a1 = out[0] > 0.5;
        a2 = out[1] > 0.5;
      } else {
        a1 = out[1] > 0.5;
        a2 = out[0] > 0.5;
      }
      cell.label = a1 ? (a2 ? 'A' : 'B') : (a2 ? 'C' : 'D');
      cells.push_back(cell);
    }
  }
  return cells;
}

namespace {

std::string csv_row(std::initializer_list<std::string> cols) {
  std::string row;
  for (const auto& c : cols) {
    if (!row.empty()) row += ",";
    row += c;
  }
  row += "\n";
  return row;
}

}  // namespace

std::vector<std::string> write_plot_data(const ExperimentConfig& cfg, const std::string& dir) {
  const Distribution& d = cfg.distribution;
  const MechanismSpec& m = cfg.mechanism;
  std::vector<std::string> written;
  std::filesystem::create_directories(dir);

  // Own-bid allocation per rank: rank t places t-1 competitors at a high
  // reference value.
  {
    const std::size_t ranks = 4;
    const std::size_t points = 256;
    const double vmax = d.bounded() ? d.support_hi() : d.quantile(0.999);
    const double vref = d.bounded() ? d.support_hi() : d.quantile(0.9995);
    std::string csv = "value,alloc_rank1,alloc_rank2,alloc_rank3,alloc_rank4\n";
    for (std::size_t p = 0; p < points; ++p) {
      double v = d.support_lo() +
                 (vmax - d.support_lo()) * static_cast<double>(p) /
                     static_cast<double>(points - 1);
      std::string row = format_decimal(v);
      for (std::size_t t = 1; t <= ranks; ++t) {
        std::vector<double> bids(t - 1, vref);
        bids.push_back(v);
        BidProfile profile(bids);
        auto alloc = allocate(m, d, profile);
        // The probed bid sits at the last rank unless it exceeds vref.
        std::size_t rank = v > vref ? 0 : t - 1;
        row += "," + format_decimal(alloc[rank]);
      }
      csv += row + "\n";
    }
    std::string path = dir + "/alloc_curves.csv";
    write_text_file(path, csv);
    written.push_back(path);
  }

  // Burn schedule vs block size for the rank-scheduled families.
  if (!m.as<GeneralizedPositionAuction>()) {
    std::string csv = "t,x_t,B_t\n";
    for (std::size_t t = 0; t <= 16; ++t) {
      double xt = 1.0, bt = 0.0;
      if (auto* pp = m.as<PostedPriceBurn>()) {
        bt = pp->effective_burn() * static_cast<double>(t);
      } else if (auto* ds = m.as<DeterministicSchedule>()) {
        bt = ds->burn_for(t);
        if (bt == kInf) break;
      } else if (auto* pa = m.as<PositionAuction>()) {
        xt = t > 0 ? pa->weights.at(t) : 1.0;
        bt = pa->block_reward_burn;
        for (std::size_t i = 1; i <= t; ++i) bt += pa->marginal_burn(i) * pa->weights.at(i);
      }
      csv += csv_row({std::to_string(t), format_decimal(xt), format_decimal(bt)});
    }
    std::string path = dir + "/burn_schedule.csv";
    write_text_file(path, csv);
    written.push_back(path);
  }

  // Two-user region map for deterministic schedules.
  if (m.as<DeterministicSchedule>()) {
    std::string csv = "phi1,phi2,region\n";
    for (const auto& cell : region_map(m, d, 32, 0.0, 6.0)) {
      csv += csv_row({format_decimal(cell.phi1), format_decimal(cell.phi2),
                      std::string(1, cell.label)});
    }
    std::string path = dir + "/region_map.csv";
    write_text_file(path, csv);
    written.push_back(path);
  }

  // Rank-t miner-simplicity margins for bounded-prior position auctions.
  if (auto* pa = m.as<PositionAuction>();
      pa && pa->constant_marginal_burn() && d.bounded()) {
    const double beta = pa->marginal_burn(1);
    const double r = g_inverse(m, d, beta);
    const double sup = d.support_hi();
    std::string csv = "t,x_t,lhs,rhs,margin\n";
    for (std::size_t t = 1; t <= 100; ++t) {
      double lhs = static_cast<double>(t) * (pa->weights.at(t) - pa->weights.at(t + 1)) *
                   (sup - r);
      double rhs = beta * pa->weights.at(t + 1);
      csv += csv_row({std::to_string(t), format_decimal(pa->weights.at(t)),
                      format_decimal(lhs), format_decimal(rhs), format_decimal(rhs - lhs)});
    }
    std::string path = dir + "/oncms_margins.csv";
    write_text_file(path, csv);
    written.push_back(path);
  }

  return written;
}

}  // namespace tfm
