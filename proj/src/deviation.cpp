#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "tfm/quadrature.hpp"
#include "tfm/verify.hpp"

namespace tfm {

namespace {

/// Net miner revenue on a profile: payments from the listed real entries
/// minus the direct burn. Fabricated entries pay the miner itself.
double revenue_of(const MechanismSpec& m, const Distribution& d, const BidProfile& profile,
                  const std::vector<bool>& is_real) {
  std::vector<double> alloc = allocate(m, d, profile);
  double rev = -direct_burn(m, d, profile, alloc);
  for (std::size_t r = 0; r < profile.size(); ++r) {
    if (is_real[r]) rev += payment_identity(m, d, profile, r);
  }
  return rev;
}

}  // namespace

DeviationReport replay_deviation(const MechanismSpec& m, const Distribution& d,
                                 const BidProfile& bids,
                                 const std::vector<std::size_t>& censored_ranks,
                                 const std::vector<double>& fabricated_bids) {
  DeviationReport rep;
  rep.original_bids = bids.values();
  rep.censored_ranks = censored_ranks;
  rep.fabricated_bids = fabricated_bids;
  std::sort(rep.fabricated_bids.begin(), rep.fabricated_bids.end(), std::greater<double>());

  rep.revenue_before = revenue_of(m, d, bids, std::vector<bool>(bids.size(), true));

  // Manipulated profile: surviving real bids plus fabricated ones. On value
  // ties, real bids take the earlier rank (deterministic assignment).
  std::vector<std::pair<double, bool>> entries;  // (value, is_real)
  for (std::size_t r = 0; r < bids.size(); ++r) {
    if (std::find(censored_ranks.begin(), censored_ranks.end(), r) == censored_ranks.end()) {
      entries.emplace_back(bids.at_rank(r), true);
    }
  }
  for (double f : fabricated_bids) entries.emplace_back(f, false);
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second && !b.second;
  });
  std::vector<double> values(entries.size());
  std::vector<bool> is_real(entries.size());
  for (std::size_t r = 0; r < entries.size(); ++r) {
    values[r] = entries[r].first;
    is_real[r] = entries[r].second;
  }
  BidProfile manipulated;
  {
    // Already sorted; BidProfile re-sorts equal keys stably enough since the
    // values are identical.
    manipulated = BidProfile(values);
  }
  rep.manipulated_bids = manipulated.values();
  rep.revenue_after = revenue_of(m, d, manipulated, is_real);
  rep.delta = rep.revenue_after - rep.revenue_before;

  const bool censored = !censored_ranks.empty();
  const bool fabricated = !fabricated_bids.empty();
  if (censored && fabricated) {
    rep.kind = DeviationKind::CensorFabricate;
  } else if (censored) {
    rep.kind = DeviationKind::Censor;
  } else if (fabricated) {
    rep.kind = DeviationKind::Fabricate;
  } else {
    rep.kind = DeviationKind::Compliant;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// deviation_search
// ---------------------------------------------------------------------------

namespace {

std::vector<double> fabrication_grid(const MechanismSpec& m, const Distribution& d,
                                     const BidProfile& bids, std::size_t grid) {
  std::vector<double> g;
  for (std::size_t k = 0; k < grid; ++k) {
    g.push_back(d.quantile((static_cast<double>(k) + 0.5) / static_cast<double>(grid)));
  }
  const double scale =
      d.bounded() ? d.support_hi() - d.support_lo() : std::max(1.0, d.quantile(0.99));
  if (d.bounded()) g.push_back(d.support_hi() - 1e-4 * scale);
  for (double b : bids) {
    double z = b - 1e-6 * scale;
    if (z >= d.support_lo()) g.push_back(z);
  }
  for (double z : interesting_bids(m, d)) g.push_back(z);
  const double hi = d.bounded() ? d.support_hi() : kInf;
  std::erase_if(g, [&](double z) { return z < d.support_lo() || z > hi; });
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

}  // namespace

DeviationReport deviation_search(const MechanismSpec& m, const Distribution& d,
                                 const BidProfile& bids, const DeviationSearchConfig& cfg) {
  const std::size_t n = bids.size();
  if (n > 12) {
    throw ConfigError("deviation_search: profile too large for exhaustive search (n > 12)");
  }
  const std::vector<double> grid = fabrication_grid(m, d, bids, cfg.grid);
  const std::size_t arity =
      bid_arity_cap(m).value_or(std::numeric_limits<std::size_t>::max());

  DeviationReport best;
  best.kind = DeviationKind::Compliant;
  best.original_bids = bids.values();
  best.manipulated_bids = bids.values();
  best.revenue_before = best.revenue_after =
      revenue_of(m, d, bids, std::vector<bool>(n, true));
  best.delta = 0.0;
  bool partial = false;

  std::size_t evaluations = 0;
  std::vector<std::size_t> censored;
  std::vector<double> fabs;

  auto try_one = [&](const std::vector<std::size_t>& cens, const std::vector<double>& fa) {
    if (evaluations >= cfg.max_evaluations) {
      partial = true;
      return;
    }
    if (n - cens.size() + fa.size() > arity) return;  // the mechanism rejects oversized inputs
    ++evaluations;
    DeviationReport rep = replay_deviation(m, d, bids, cens, fa);
    if (rep.delta > best.delta + 1e-15) best = std::move(rep);
  };

  // Fabricated multisets of size <= max_fabricate, nondecreasing grid indices.
  std::function<void(std::size_t, std::size_t)> fabricate = [&](std::size_t from,
                                                                std::size_t remaining) {
    try_one(censored, fabs);
    if (remaining == 0 || partial) return;
    for (std::size_t gi = from; gi < grid.size() && !partial; ++gi) {
      fabs.push_back(grid[gi]);
      fabricate(gi, remaining - 1);
      fabs.pop_back();
    }
  };

  const std::size_t mask_end = cfg.allow_censor ? (std::size_t{1} << n) : 1;
  for (std::size_t mask = 0; mask < mask_end && !partial; ++mask) {
    censored.clear();
    for (std::size_t r = 0; r < n; ++r) {
      if (mask & (std::size_t{1} << r)) censored.push_back(r);
    }
    fabricate(0, cfg.max_fabricate);
  }

  if (partial) {
    best.note = best.note.empty() ? "partial search (evaluation budget exceeded)"
                                  : best.note + "; partial search (evaluation budget exceeded)";
  }
  if (best.delta <= 0.0 && best.kind == DeviationKind::Compliant && best.note.empty()) {
    best.note = "no deviation improves on compliant play";
  }
  return best;
}

// ---------------------------------------------------------------------------
// Counterexample generators
// ---------------------------------------------------------------------------

DeviationReport increasing_marginal_burn_deviation(const Distribution& d,
                                                   const std::vector<double>& betas,
                                                   double eps) {
  DeviationReport rep;
  rep.metric = "net_revenue";
  std::size_t t = 0;  // 1-based index of the step, 0 = none
  for (std::size_t i = 0; i + 1 < betas.size(); ++i) {
    if (betas[i] < betas[i + 1]) {
      t = i + 1;
      break;
    }
  }
  if (t == 0) {
    rep.applicable = false;
    rep.kind = DeviationKind::Compliant;
    rep.note = "not applicable: marginal burns are non-increasing";
    return rep;
  }
  if (!(eps > 0.0) || eps >= betas[t] - betas[t - 1]) {
    throw ConfigError("increasing_marginal_burn_deviation: eps must lie in (0, step gap)");
  }

  MechanismSpec m;
  m.family = DeterministicSchedule{betas, ScheduleTail::ConstantLast, 0.0};
  m.objective = ObjectiveSpace::Virtual;

  // Profile with phi(v_i) = beta_i + eps for i <= t; the fabricated bid's
  // phi lands strictly between beta_t and phi(v_t), so it is not allocated
  // but lifts user t's critical bid.
  std::vector<double> values(t);
  for (std::size_t i = 0; i < t; ++i) values[i] = d.inverse_virtual_value(betas[i] + eps);
  const double phi_top = betas[t - 1] + eps;
  const double phi_fake = 0.5 * (betas[t - 1] + std::min(phi_top, betas[t]));
  const double fake = d.inverse_virtual_value(phi_fake);

  rep = replay_deviation(m, d, BidProfile(values), {}, {fake});
  char buf[192];
  std::snprintf(buf, sizeof(buf),
                "step beta_%zu=%.6g < beta_%zu=%.6g: the fabricated bid raises user %zu's "
                "payment from %.9g to %.9g",
                t, betas[t - 1], t + 1, betas[t], t, d.inverse_virtual_value(betas[t - 1]), fake);
  rep.note = buf;
  return rep;
}

DeviationReport decreasing_marginal_burn_deviation(const Distribution& d,
                                                   const std::function<double(std::size_t)>& beta,
                                                   std::size_t n_cap) {
  DeviationReport rep;
  rep.metric = "net_revenue";

  std::size_t t = 0;
  for (std::size_t i = 1; i < n_cap; ++i) {
    if (beta(i) > beta(i + 1)) {
      t = i;
      break;
    }
    if (beta(i) < beta(i + 1)) break;  // increasing step: a different generator applies
  }
  if (t == 0) {
    rep.applicable = false;
    rep.kind = DeviationKind::Compliant;
    rep.note = "not applicable: marginal burns are constant (no strictly decreasing step)";
    return rep;
  }

  double best_tally = -kInf;
  std::string tally_note;
  for (std::size_t n = t + 1; n <= n_cap; ++n) {
    const double gap = beta(t) - beta(t + 1);
    const double eps = gap / 4.0;
    const double delta = std::min(gap / 4.0, 0.9 * static_cast<double>(t) * eps /
                                                 static_cast<double>(n - t));
    const double delta_top = static_cast<double>(t) * eps -
                             static_cast<double>(n - t) * delta;  // mass to recover
    const double delta_fake = 1.01 * delta_top;

    // Feasibility of the construction at this n.
    if (beta(n + 1) + delta_fake >= beta(n) + delta) continue;
    bool representable = true;
    std::vector<double> values(n);
    std::vector<double> betas(n + 1);
    for (std::size_t i = 1; i <= n + 1; ++i) betas[i - 1] = beta(i);
    for (std::size_t i = 1; i <= n && representable; ++i) {
      double target = i <= t ? beta(i) - eps : beta(i) + delta;
      if (d.bounded() && target > d.phi_at_sup()) {
        representable = false;
        break;
      }
      values[i - 1] = d.inverse_virtual_value(target);
    }
    if (!representable) continue;
    const double phi_fake = beta(n + 1) + delta_fake;
    if (d.bounded() && phi_fake > d.phi_at_sup()) continue;
    const double fake = d.inverse_virtual_value(phi_fake);
    if (fake >= values[n - 1]) continue;

    MechanismSpec m;
    m.family = DeterministicSchedule{betas, ScheduleTail::ConstantLast, 0.0};
    m.objective = ObjectiveSpace::Virtual;

    BidProfile profile(values);
    std::vector<double> pre = allocate(m, d, profile);
    if (std::any_of(pre.begin(), pre.end(), [](double a) { return a > 0.5; })) continue;
    BidProfile with_fake = profile.with_bid(fake);
    std::vector<double> post = allocate(m, d, with_fake);
    if (std::any_of(post.begin(), post.end(), [](double a) { return a < 0.5; })) continue;

    DeviationReport attempt = replay_deviation(m, d, profile, {}, {fake});
    if (attempt.delta > best_tally) {
      best_tally = attempt.delta;
      char buf[96];
      std::snprintf(buf, sizeof(buf), "best running payment-minus-burn tally %.9g at n=%zu",
                    attempt.delta, n);
      tally_note = buf;
    }
    if (attempt.delta > 0.0) {
      char buf[128];
      std::snprintf(buf, sizeof(buf),
                    "n=%zu: the empty block flips to full inclusion; payments outrun the burn "
                    "by %.9g",
                    n, attempt.delta);
      attempt.note = buf;
      return attempt;
    }
  }

  rep.applicable = true;
  rep.kind = DeviationKind::Fabricate;
  rep.note = "inconclusive within the block-size cap; " +
             (tally_note.empty() ? std::string("no representable construction found")
                                 : tally_note);
  return rep;
}

// ---------------------------------------------------------------------------
// posted_price_mistuning
// ---------------------------------------------------------------------------

namespace {

double integrate_with_breaks(const Distribution& d, double a, double b,
                             const std::function<double(double)>& f) {
  if (!(b > a)) return 0.0;
  std::vector<double> pts{a, b};
  for (double z : d.analytic_breakpoints()) {
    if (z > a && z < b) pts.push_back(z);
  }
  std::sort(pts.begin(), pts.end());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    acc += AdaptiveSimpson::integrate(f, pts[i], pts[i + 1]);
  }
  return acc;
}

}  // namespace

MistuningReport posted_price_mistuning(const Distribution& d, double price, double burn,
                                       std::size_t mc_samples, std::uint64_t seed,
                                       ExecPolicy exec) {
  MistuningReport rep;
  rep.price = price;
  rep.burn = burn;
  rep.samples = mc_samples;
  rep.seed = seed;

  const double reserve = d.monopoly_reserve();
  if (price < reserve - 1e-9) {
    throw DomainError("posted_price_mistuning: price below the monopoly reserve");
  }
  if (d.bounded() && price > d.support_hi()) {
    throw DomainError("posted_price_mistuning: price above the support");
  }
  rep.phi_at_price = d.virtual_value(price);

  if (std::abs(burn - rep.phi_at_price) <= 1e-12) {
    rep.kind = DeviationKind::Compliant;
    return rep;
  }

  // The revenue-optimal inclusion threshold charges users from
  // g_inverse(burn); the tuning gap is the virtual-utility mass between the
  // posted threshold and the optimal one.
  double opt = d.inverse_virtual_value(std::min(burn, d.phi_at_sup()));
  if (d.bounded()) opt = std::min(opt, d.support_hi());
  auto integrand = [&](double z) { return (d.virtual_value(z) - burn) * d.pdf(z); };

  if (burn < rep.phi_at_price) {
    rep.kind = DeviationKind::Rebate;
    rep.offchain_fee = price - opt;  // rebate returned to users bidding up
    rep.delta_quadrature = integrate_with_breaks(d, opt, price, integrand);
  } else {
    rep.kind = DeviationKind::EntryFee;
    rep.offchain_fee = opt - price;  // entry fee collected off-chain
    rep.delta_quadrature = integrate_with_breaks(d, price, opt, [&](double z) {
      return -integrand(z);
    });
  }

  // Monte Carlo replay on the same definition: move the inclusion threshold
  // from `price` to `opt` and account the per-user virtual utility change.
  if (mc_samples > 0) {
    std::vector<double> contrib(mc_samples);
    for_each_index(mc_samples, exec, [&](std::size_t s) {
      Rng rng(stream_seed(seed, "mistune.mc", s));
      double v = d.draw(rng);
      double phi = d.virtual_value(v);
      double in_opt = v >= opt ? 1.0 : 0.0;
      double in_posted = v >= price ? 1.0 : 0.0;
      contrib[s] = (phi - burn) * (in_opt - in_posted);
    });
    double mean = 0.0;
    for (double c : contrib) mean += c;
    mean /= static_cast<double>(mc_samples);
    double var = 0.0;
    for (double c : contrib) var += (c - mean) * (c - mean);
    var /= std::max<double>(1.0, static_cast<double>(mc_samples - 1));
    rep.delta_mc = mean;
    rep.mc_stderr = std::sqrt(var / static_cast<double>(mc_samples));
  }
  return rep;
}

}  // namespace tfm
