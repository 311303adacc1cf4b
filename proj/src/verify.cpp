#include "tfm/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace tfm {

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Inconclusive: return "inconclusive";
  }
  return "?";
}

const char* to_string(DeviationKind k) {
  switch (k) {
    case DeviationKind::Censor: return "censor";
    case DeviationKind::Fabricate: return "fabricate";
    case DeviationKind::CensorFabricate: return "censor+fabricate";
    case DeviationKind::OffchainCoerce: return "offchain-coerce";
    case DeviationKind::EntryFee: return "entry-fee";
    case DeviationKind::Rebate: return "rebate";
    case DeviationKind::Compliant: return "compliant";
  }
  return "?";
}

void CheckReport::finalize() {
  status = CheckStatus::Pass;
  for (const auto& c : conditions) {
    if (c.status == CheckStatus::Fail) {
      status = CheckStatus::Fail;
      return;
    }
    if (c.status == CheckStatus::Inconclusive) status = CheckStatus::Inconclusive;
  }
}

namespace detail {

/// Allocation and burn for a per-user bid vector, reported against the
/// original user indices (stable value-descending order).
struct UserOutcome {
  std::vector<double> alloc;  // by user index
  double burn = 0.0;
  BidProfile profile;
};

UserOutcome outcome_by_user(const MechanismSpec& m, const Distribution& d,
                            const std::vector<double>& bids_by_user) {
  const std::size_t n = bids_by_user.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return bids_by_user[a] > bids_by_user[b];
  });
  std::vector<double> sorted(n);
  for (std::size_t r = 0; r < n; ++r) sorted[r] = bids_by_user[order[r]];
  UserOutcome out;
  out.profile = BidProfile(std::move(sorted));
  std::vector<double> alloc = allocate(m, d, out.profile);
  out.burn = direct_burn(m, d, out.profile, alloc);
  out.alloc.assign(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) out.alloc[order[r]] = alloc[r];
  return out;
}

/// sum_i g(v_i) X_i(bids) - B(bids), the coordination objective with the
/// truthful users' g-weights but an arbitrary submitted bid vector.
double coordination_objective(const MechanismSpec& m, const Distribution& d,
                              const std::vector<double>& g_weights,
                              const std::vector<double>& bids_by_user) {
  UserOutcome o = outcome_by_user(m, d, bids_by_user);
  double acc = -o.burn;
  for (std::size_t i = 0; i < g_weights.size(); ++i) acc += g_weights[i] * o.alloc[i];
  return acc;
}

DeviationKind classify_misreport(const std::vector<double>& v, const std::vector<double>& w) {
  bool up = false, down = false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (w[i] > v[i] + 1e-15) up = true;
    if (w[i] < v[i] - 1e-15) down = true;
  }
  if (up && !down) return DeviationKind::Rebate;
  if (down && !up) return DeviationKind::EntryFee;
  if (up && down) return DeviationKind::OffchainCoerce;
  return DeviationKind::Compliant;
}

std::vector<double> misreport_levels(const MechanismSpec& m, const Distribution& d,
                                     std::size_t grid) {
  std::vector<double> levels = interesting_bids(m, d);
  for (std::size_t k = 0; k < grid; ++k) {
    levels.push_back(d.quantile((static_cast<double>(k) + 0.5) / static_cast<double>(grid)));
  }
  levels.push_back(d.support_lo());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

void keep_first_witnesses(ConditionResult* cond) {
  if (cond->witnesses.size() > kMaxWitnesses) cond->witnesses.resize(kMaxWitnesses);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// check_mir_conditions
// ---------------------------------------------------------------------------

CheckReport check_mir_conditions(const MechanismSpec& m, const Distribution& d,
                                 const MirParams& params, ExecPolicy exec) {
  if (m.objective != ObjectiveSpace::Virtual) {
    throw UnsupportedQueryError("check_mir_conditions: requires the virtual objective space");
  }
  CheckReport report;
  report.check_name = "mir_conditions";
  report.seed = params.seed;

  const std::vector<double> levels = detail::misreport_levels(m, d, params.misreport_grid);
  std::optional<ConditionalNegVV> neg;
  std::string neg_error;
  try {
    neg.emplace(d);
    if (!(neg->prob_mass() > 0.0)) neg_error = "Pr[phi(v) <= 0] is zero";
  } catch (const std::exception& e) {
    neg_error = e.what();
  }

  for (std::size_t n : params.n_list) {
    struct Slot {
      double a_margin = kInf, b_margin = kInf, c_margin = kInf;
      std::optional<DeviationReport> a_wit, b_wit, c_wit;
    };
    std::vector<Slot> slots(params.samples);

    for_each_index(params.samples, exec, [&](std::size_t s) {
      Slot& slot = slots[s];
      const std::uint64_t idx = (static_cast<std::uint64_t>(n) << 32) | s;
      Rng rng(stream_seed(params.seed, "mir.profile", idx));
      std::vector<double> v(n);
      for (auto& x : v) x = d.draw(rng);
      std::vector<double> gw(n);
      for (std::size_t i = 0; i < n; ++i) gw[i] = d.virtual_value(v[i]);

      const double u_truth = detail::coordination_objective(m, d, gw, v);

      // (A) Optimal for n users: truthful play beats sampled misreport
      // profiles and all single-coordinate grid misreports.
      auto consider = [&](const std::vector<double>& w) {
        double u_w = detail::coordination_objective(m, d, gw, w);
        double margin = u_truth - u_w;
        if (margin < slot.a_margin) {
          slot.a_margin = margin;
          if (margin < -params.tol) {
            DeviationReport wit;
            wit.kind = detail::classify_misreport(v, w);
            wit.metric = "virtual_utility";
            wit.original_bids = BidProfile(v).values();
            wit.manipulated_bids = BidProfile(w).values();
            wit.revenue_before = u_truth;
            wit.revenue_after = u_w;
            wit.delta = u_w - u_truth;
            slot.a_wit = std::move(wit);
          }
        }
      };
      Rng wrng(stream_seed(params.seed, "mir.misreport", idx));
      std::vector<double> w(n);
      for (auto& x : w) x = d.draw(wrng);
      consider(w);
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> wi = v;
        for (double z : levels) {
          wi[i] = z;
          consider(wi);
        }
      }
      // Joint coordinations: every user steered to the same level.
      for (double z : levels) {
        consider(std::vector<double>(n, z));
      }

      // (B) Negative virtual values are never allocated.
      detail::UserOutcome truth = detail::outcome_by_user(m, d, v);
      for (std::size_t i = 0; i < n; ++i) {
        if (gw[i] < -params.tol && truth.alloc[i] > params.tol) {
          double margin = -truth.alloc[i];
          if (margin < slot.b_margin) {
            slot.b_margin = margin;
            DeviationReport wit;
            wit.kind = DeviationKind::OffchainCoerce;
            wit.metric = "allocation_at_negative_virtual_value";
            wit.original_bids = truth.profile.values();
            wit.manipulated_bids = truth.profile.values();
            wit.revenue_before = 0.0;
            wit.revenue_after = truth.alloc[i];
            wit.delta = truth.alloc[i];
            char buf[96];
            std::snprintf(buf, sizeof(buf), "user with phi=%.6g allocated %.6g", gw[i],
                          truth.alloc[i]);
            wit.note = buf;
            slot.b_wit = std::move(wit);
          }
        }
      }

      // (C) Appending nonpositive-virtual-value draws is utility-neutral.
      if (neg && neg_error.empty()) {
        Rng arng(stream_seed(params.seed, "mir.append", idx));
        for (std::size_t trial = 0; trial < params.append_trials; ++trial) {
          std::size_t extra = 1 + trial % 3;
          std::vector<double> ext = v;
          for (std::size_t k = 0; k < extra; ++k) ext.push_back(neg->draw_one(arng));
          double u_ext = detail::coordination_objective(m, d, gw, ext);  // weights: first n
          double margin = -std::abs(u_ext - u_truth);
          if (margin < slot.c_margin) {
            slot.c_margin = margin;
            if (margin < -params.tol) {
              DeviationReport wit;
              wit.kind = DeviationKind::Fabricate;
              wit.metric = "virtual_utility";
              wit.original_bids = BidProfile(v).values();
              wit.manipulated_bids = BidProfile(ext).values();
              wit.fabricated_bids.assign(ext.begin() + static_cast<std::ptrdiff_t>(n), ext.end());
              wit.revenue_before = u_truth;
              wit.revenue_after = u_ext;
              wit.delta = u_ext - u_truth;
              slot.c_wit = std::move(wit);
            }
          }
        }
      }
    });

    char label[64];
    ConditionResult a, b, c;
    std::snprintf(label, sizeof(label), "A:optimal_for_n (n=%zu)", n);
    a.name = label;
    std::snprintf(label, sizeof(label), "B:negative_vv_suboptimal (n=%zu)", n);
    b.name = label;
    std::snprintf(label, sizeof(label), "C:censor_fabricate_neutral (n=%zu)", n);
    c.name = label;
    a.trials = b.trials = c.trials = params.samples;
    for (const auto& s : slots) {
      a.worst_margin = std::min(a.worst_margin, s.a_margin);
      b.worst_margin = std::min(b.worst_margin, s.b_margin);
      c.worst_margin = std::min(c.worst_margin, s.c_margin);
      if (s.a_wit) {
        ++a.violations;
        if (a.witnesses.size() < kMaxWitnesses) a.witnesses.push_back(*s.a_wit);
      }
      if (s.b_wit) {
        ++b.violations;
        if (b.witnesses.size() < kMaxWitnesses) b.witnesses.push_back(*s.b_wit);
      }
      if (s.c_wit) {
        ++c.violations;
        if (c.witnesses.size() < kMaxWitnesses) c.witnesses.push_back(*s.c_wit);
      }
    }
    a.status = a.violations ? CheckStatus::Fail : CheckStatus::Pass;
    b.status = b.violations ? CheckStatus::Fail : CheckStatus::Pass;
    if (!neg_error.empty()) {
      c.status = CheckStatus::Inconclusive;
      c.note = "cannot sample the nonpositive-virtual-value conditional: " + neg_error;
    } else {
      c.status = c.violations ? CheckStatus::Fail : CheckStatus::Pass;
    }
    report.conditions.push_back(std::move(a));
    report.conditions.push_back(std::move(b));
    report.conditions.push_back(std::move(c));
  }

  report.finalize();
  if (report.status == CheckStatus::Pass) {
    report.note =
        "conditions hold on the mechanism's own outcome rule: certifies user simplicity "
        "and off-chain influence proofness for this prior";
  }
  return report;
}

// ---------------------------------------------------------------------------
// check_oncus
// ---------------------------------------------------------------------------

namespace {

Outcome outcome_with_hook(const MechanismSpec& m, const Distribution& d, const BidProfile& p,
                          const std::function<void(Outcome&, const BidProfile&)>& perturb) {
  Outcome o;
  o.alloc = allocate(m, d, p);
  o.payments = payments(m, d, p);
  o.burn = 0.0;  // utilities below never read the burn
  if (perturb) perturb(o, p);
  return o;
}

}  // namespace

CheckReport check_oncus(const MechanismSpec& m, const Distribution& d, const OncusParams& params,
                        ExecPolicy exec) {
  CheckReport report;
  report.check_name = "oncus";
  report.seed = params.seed;

  const std::vector<double> levels = detail::misreport_levels(m, d, params.grid);

  struct Slot {
    double margin = kInf;
    std::optional<DeviationReport> wit;
  };
  std::vector<Slot> slots(params.samples);

  for_each_index(params.samples, exec, [&](std::size_t s) {
    Slot& slot = slots[s];
    Rng rng(stream_seed(params.seed, "oncus.profile", s));
    std::vector<double> v(params.n);
    for (auto& x : v) x = d.draw(rng);
    BidProfile truth_profile{v};
    Outcome truth = outcome_with_hook(m, d, truth_profile, params.perturb);

    // Utilities are evaluated per rank of the truthful profile.
    for (std::size_t i = 0; i < params.n; ++i) {
      const double vi = truth_profile.at_rank(i);
      const double u_truth = vi * truth.alloc[i] - truth.payments[i];
      BidProfile others = truth_profile.without_rank(i);
      for (double z : levels) {
        if (z == vi) continue;
        BidProfile mis = others.with_bid(z);
        // The misreported bid ranks above equal values by construction.
        std::size_t rank = 0;
        while (rank < mis.size() && mis.at_rank(rank) != z) ++rank;
        Outcome mo = outcome_with_hook(m, d, mis, params.perturb);
        const double u_mis = vi * mo.alloc[rank] - mo.payments[rank];
        const double margin = u_truth - u_mis;
        if (margin < slot.margin) {
          slot.margin = margin;
          if (margin < -params.tol) {
            DeviationReport wit;
            wit.kind = DeviationKind::OffchainCoerce;
            wit.metric = "user_utility";
            wit.original_bids = truth_profile.values();
            wit.manipulated_bids = mis.values();
            wit.revenue_before = u_truth;
            wit.revenue_after = u_mis;
            wit.delta = u_mis - u_truth;
            char buf[96];
            std::snprintf(buf, sizeof(buf), "user at rank %zu gains by %s to %.9g", i,
                          z < vi ? "underbidding" : "overbidding", z);
            wit.note = buf;
            slot.wit = std::move(wit);
          }
        }
      }
    }
  });

  ConditionResult cond;
  cond.name = "truthful_dominant";
  cond.trials = params.samples;
  for (auto& s : slots) {
    cond.worst_margin = std::min(cond.worst_margin, s.margin);
    if (s.wit) {
      ++cond.violations;
      if (cond.witnesses.size() < kMaxWitnesses) cond.witnesses.push_back(*s.wit);
    }
  }
  cond.status = cond.violations ? CheckStatus::Fail : CheckStatus::Pass;
  report.conditions.push_back(std::move(cond));
  report.finalize();
  return report;
}

// ---------------------------------------------------------------------------
// mc_revenue_equivalence
// ---------------------------------------------------------------------------

RevenueEquivalenceReport mc_revenue_equivalence(const MechanismSpec& m, const Distribution& d,
                                                std::size_t n, std::size_t samples,
                                                std::uint64_t seed, ExecPolicy exec) {
  RevenueEquivalenceReport rep;
  rep.samples = samples;
  rep.seed = seed;
  if (n == 0 || samples == 0) return rep;

  std::vector<double> pay(samples), surplus(samples);
  for_each_index(samples, exec, [&](std::size_t s) {
    BidProfile profile = d.sample(n, stream_seed(seed, "releq.profile", s));
    std::vector<double> alloc = allocate(m, d, profile);
    std::vector<double> p = payments(m, d, profile);
    double sp = 0.0, sv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sp += p[i];
      sv += d.virtual_value(profile.at_rank(i)) * alloc[i];
    }
    pay[s] = sp;
    surplus[s] = sv;
  });

  double mean_p = 0.0, mean_v = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    mean_p += pay[s];
    mean_v += surplus[s];
  }
  mean_p /= static_cast<double>(samples);
  mean_v /= static_cast<double>(samples);
  double var = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    double diff = (pay[s] - surplus[s]) - (mean_p - mean_v);
    var += diff * diff;
  }
  var /= std::max<double>(1.0, static_cast<double>(samples - 1));
  rep.payment_mean = mean_p;
  rep.virtual_surplus_mean = mean_v;
  rep.diff_mean = mean_p - mean_v;
  rep.diff_stderr = std::sqrt(var / static_cast<double>(samples));
  rep.z_score = rep.diff_stderr > 0.0 ? std::abs(rep.diff_mean) / rep.diff_stderr : 0.0;
  rep.pass = rep.diff_stderr > 0.0 ? rep.z_score <= 3.0 : std::abs(rep.diff_mean) <= 1e-12;
  return rep;
}

// ---------------------------------------------------------------------------
// check_gscp
// ---------------------------------------------------------------------------

CheckReport check_gscp(const MechanismSpec& m, const Distribution& d, const GscpParams& params,
                       ExecPolicy exec) {
  if (m.objective != ObjectiveSpace::Value) {
    throw UnsupportedQueryError("check_gscp: requires the value objective space");
  }
  CheckReport report;
  report.check_name = "gscp";
  report.seed = params.seed;

  const std::vector<double> levels = detail::misreport_levels(m, d, params.misreport_grid);
  const bool zero_in_support = d.support_lo() <= 1e-12;

  for (std::size_t n : params.n_list) {
    struct Slot {
      double a_margin = kInf, c_margin = kInf, p_margin = kInf;
      std::optional<DeviationReport> a_wit, c_wit, p_wit;
    };
    std::vector<Slot> slots(params.samples);

    for_each_index(params.samples, exec, [&](std::size_t s) {
      Slot& slot = slots[s];
      const std::uint64_t idx = (static_cast<std::uint64_t>(n) << 32) | s;
      Rng rng(stream_seed(params.seed, "gscp.profile", idx));
      std::vector<double> v(n);
      for (auto& x : v) x = d.draw(rng);
      const std::vector<double>& weights = v;  // coalition weights are the raw values

      const double u_truth = detail::coordination_objective(m, d, weights, v);

      auto consider = [&](const std::vector<double>& w) {
        double u_w = detail::coordination_objective(m, d, weights, w);
        double margin = u_truth - u_w;
        if (margin < slot.a_margin) {
          slot.a_margin = margin;
          if (margin < -params.tol) {
            DeviationReport wit;
            wit.kind = detail::classify_misreport(v, w);
            wit.metric = "coalition_utility";
            wit.original_bids = BidProfile(v).values();
            wit.manipulated_bids = BidProfile(w).values();
            wit.revenue_before = u_truth;
            wit.revenue_after = u_w;
            wit.delta = u_w - u_truth;
            slot.a_wit = std::move(wit);
          }
        }
      };
      Rng wrng(stream_seed(params.seed, "gscp.misreport", idx));
      std::vector<double> w(n);
      for (auto& x : w) x = d.draw(wrng);
      consider(w);
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> wi = v;
        for (double z : levels) {
          wi[i] = z;
          consider(wi);
        }
      }
      for (double z : levels) {
        consider(std::vector<double>(n, z));  // joint coordinations
      }

      if (zero_in_support) {
        for (std::size_t trial = 0; trial < params.append_trials; ++trial) {
          std::size_t extra = 1 + trial % 3;
          std::vector<double> ext = v;
          for (std::size_t k = 0; k < extra; ++k) ext.push_back(0.0);
          double u_ext = detail::coordination_objective(m, d, weights, ext);
          double margin = -std::abs(u_ext - u_truth);
          if (margin < slot.c_margin) {
            slot.c_margin = margin;
            if (margin < -params.tol) {
              DeviationReport wit;
              wit.kind = DeviationKind::Fabricate;
              wit.metric = "coalition_utility";
              wit.original_bids = BidProfile(v).values();
              wit.manipulated_bids = BidProfile(ext).values();
              wit.fabricated_bids.assign(extra, 0.0);
              wit.revenue_before = u_truth;
              wit.revenue_after = u_ext;
              wit.delta = u_ext - u_truth;
              slot.c_wit = std::move(wit);
            }
          }
        }
      }

      // Payments dominate the burn (the miner's revenue is nonnegative).
      BidProfile profile{v};
      std::vector<double> alloc = allocate(m, d, profile);
      std::vector<double> p = payments(m, d, profile);
      double total = 0.0;
      for (double x : p) total += x;
      double burn = direct_burn(m, d, profile, alloc);
      double margin = total - burn;
      if (margin < slot.p_margin) {
        slot.p_margin = margin;
        if (margin < -params.tol) {
          DeviationReport wit;
          wit.kind = DeviationKind::OffchainCoerce;
          wit.metric = "payments_minus_burn";
          wit.original_bids = profile.values();
          wit.manipulated_bids = profile.values();
          wit.revenue_before = total;
          wit.revenue_after = burn;
          wit.delta = margin;
          slot.p_wit = std::move(wit);
        }
      }
    });

    char label[80];
    ConditionResult a, c, p;
    std::snprintf(label, sizeof(label), "A:optimal_for_n (n=%zu)", n);
    a.name = label;
    std::snprintf(label, sizeof(label), "C:zero_bid_neutral (n=%zu)", n);
    c.name = label;
    std::snprintf(label, sizeof(label), "payments_dominate_burn (n=%zu)", n);
    p.name = label;
    a.trials = c.trials = p.trials = params.samples;
    for (const auto& s : slots) {
      a.worst_margin = std::min(a.worst_margin, s.a_margin);
      c.worst_margin = std::min(c.worst_margin, s.c_margin);
      p.worst_margin = std::min(p.worst_margin, s.p_margin);
      if (s.a_wit) {
        ++a.violations;
        if (a.witnesses.size() < kMaxWitnesses) a.witnesses.push_back(*s.a_wit);
      }
      if (s.c_wit) {
        ++c.violations;
        if (c.witnesses.size() < kMaxWitnesses) c.witnesses.push_back(*s.c_wit);
      }
      if (s.p_wit) {
        ++p.violations;
        if (p.witnesses.size() < kMaxWitnesses) p.witnesses.push_back(*s.p_wit);
      }
    }
    a.status = a.violations ? CheckStatus::Fail : CheckStatus::Pass;
    if (!zero_in_support) {
      c.status = CheckStatus::Inconclusive;
      c.note = "support does not contain 0; zero-bid neutrality not sampled";
    } else {
      c.status = c.violations ? CheckStatus::Fail : CheckStatus::Pass;
    }
    p.status = p.violations ? CheckStatus::Fail : CheckStatus::Pass;
    report.conditions.push_back(std::move(a));
    report.conditions.push_back(std::move(c));
    report.conditions.push_back(std::move(p));
  }

  // Mirrored miner-simplicity conditions for the position families.
  if (m.as<PositionAuction>()) {
    OncmsPositionParams pp;
    pp.t_max = params.t_max;
    CheckReport ms = check_oncms_position(m, d, pp);
    for (auto& c : ms.conditions) report.conditions.push_back(std::move(c));
  } else if (m.as<GeneralizedPositionAuction>()) {
    OncmsGenposParams gp;
    gp.t_max = std::min<std::size_t>(params.t_max, 50);
    CheckReport ms = check_oncms_genpos(m, d, gp);
    for (auto& c : ms.conditions) report.conditions.push_back(std::move(c));
  }

  report.finalize();
  return report;
}

// ---------------------------------------------------------------------------
// weight_reading_report
// ---------------------------------------------------------------------------

namespace {

struct Frac {
  __int128 num = 0;
  __int128 den = 1;
};

Frac frac_from_double(double x) {
  // Exact for binary fractions with <= 2^20 denominator (the readings use
  // 1 and 1/2).
  long long den = 1LL << 20;
  long long num = std::llround(x * static_cast<double>(den));
  return Frac{num, den};
}

Frac weight_frac(const PositionWeights& w, std::size_t t) {
  Frac s;
  if (w.kind == PositionWeights::Kind::HarmonicFirst && t == 1) {
    s = frac_from_double(w.first);
    return s;
  }
  s = frac_from_double(w.scale);
  s.den *= static_cast<__int128>(t) * static_cast<__int128>(t + 1);
  return s;
}

bool frac_eq(Frac a, Frac b) { return a.num * b.den == b.num * a.den; }

Frac frac_sub(Frac a, Frac b) { return Frac{a.num * b.den - b.num * a.den, a.den * b.den}; }

Frac frac_scale(Frac a, long long k) { return Frac{a.num * k, a.den}; }

}  // namespace

WeightReadingReport weight_reading_report(const PositionWeights& w) {
  WeightReadingReport rep;
  rep.partial_sum_1e6 = w.partial_sum(1000000);
  rep.total_sum = w.total_sum();
  rep.feasible_capacity_one = rep.total_sum <= 1.0 + 1e-12;

  rep.identity_exact_to_100 = true;
  rep.first_identity_failure = 0;
  if (w.kind == PositionWeights::Kind::Harmonic ||
      w.kind == PositionWeights::Kind::HarmonicFirst) {
    for (std::size_t t = 1; t <= 100; ++t) {
      Frac xt = weight_frac(w, t);
      Frac xt1 = weight_frac(w, t + 1);
      Frac lhs = frac_scale(frac_sub(xt, xt1), static_cast<long long>(t));
      Frac rhs = frac_scale(xt1, 2);
      if (!frac_eq(lhs, rhs)) {
        rep.identity_exact_to_100 = false;
        rep.first_identity_failure = t;
        break;
      }
    }
  } else {
    // Exact-rational check only applies to the harmonic readings.
    for (std::size_t t = 1; t <= 100; ++t) {
      double lhs = static_cast<double>(t) * (w.at(t) - w.at(t + 1));
      double rhs = 2.0 * w.at(t + 1);
      if (std::abs(lhs - rhs) > 1e-15 * std::max(1.0, std::abs(rhs))) {
        rep.identity_exact_to_100 = false;
        rep.first_identity_failure = t;
        break;
      }
    }
  }
  return rep;
}

}  // namespace tfm
