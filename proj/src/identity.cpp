#include "tfm/identity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "tfm/quadrature.hpp"

namespace tfm {

namespace {

constexpr double kBisectTol = 1e-12;
constexpr int kBisectIters = 200;

/// Own-bid allocation of one user given the other bids, under the profile
/// convention that a new bid ranks above equal values.
class OwnBidAlloc {
 public:
  OwnBidAlloc(const MechanismSpec& m, const Distribution& d, const BidProfile& bids,
              std::size_t rank)
      : m_(m), d_(d), others_(bids.without_rank(rank)) {}

  double operator()(double z) const {
    BidProfile p = others_.with_bid(z);
    std::vector<double> a = allocate(m_, d_, p);
    return a[rank_of(z)];
  }

  std::size_t rank_of(double z) const {
    const auto& v = others_.values();
    return static_cast<std::size_t>(
        std::lower_bound(v.begin(), v.end(), z, std::greater<double>()) - v.begin());
  }

  const std::vector<double>& others() const { return others_.values(); }

 private:
  const MechanismSpec& m_;
  const Distribution& d_;
  BidProfile others_;
};

double upper_probe_limit(const Distribution& d) {
  return d.bounded() ? d.support_hi() : 1e15;
}

void collect_jumps(const std::function<double(double)>& f, double a, double b, double fa,
                   double fb, double tol, std::vector<std::pair<double, double>>* out) {
  if (fb < fa - 1e-12) {
    throw IncentiveViolationError("own-bid allocation is not monotone", a, b);
  }
  if (fb - fa <= 1e-15) return;
  if (b - a <= tol) {
    out->emplace_back(0.5 * (a + b), fb - fa);
    return;
  }
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  collect_jumps(f, a, m, fa, fm, tol, out);
  collect_jumps(f, m, b, fm, fb, tol, out);
}

}  // namespace

double step_function_payment(const std::function<double(double)>& alloc_at, double own_bid,
                             double scale) {
  if (own_bid <= 0.0) return 0.0;
  const double f0 = alloc_at(0.0);
  const double fv = alloc_at(own_bid);
  if (fv < f0 - 1e-12) {
    throw IncentiveViolationError("own-bid allocation is not monotone", 0.0, own_bid);
  }
  std::vector<std::pair<double, double>> jumps;
  collect_jumps(alloc_at, 0.0, own_bid, f0, fv, kBisectTol * std::max(1.0, scale), &jumps);
  // v x(v) - int_0^v x = sum_j z_j * jump_j for a monotone step function.
  double pay = 0.0;
  for (const auto& [z, delta] : jumps) pay += z * delta;
  return pay;
}

double critical_bid(const MechanismSpec& m, const Distribution& d, const BidProfile& bids,
                    std::size_t rank) {
  if (auto* pp = m.as<PostedPriceBurn>()) {
    return pp->price;
  }
  if (!m.as<DeterministicSchedule>()) {
    throw UnsupportedQueryError(
        "critical_bid: allocation at this rank is not deterministic (use payment_identity)");
  }
  OwnBidAlloc alloc(m, d, bids, rank);
  auto allocated = [&](double z) { return alloc(z) > 0.5; };
  if (allocated(0.0)) return 0.0;
  double hi = std::max({bids.at_rank(rank), 1.0, d.monopoly_reserve()});
  const double cap = upper_probe_limit(d);
  hi = std::min(hi, cap);
  while (!allocated(hi)) {
    if (hi >= cap) return kInf;  // never allocated
    hi = std::min(hi * 2.0, cap);
  }
  double lo = 0.0;
  for (int it = 0; it < kBisectIters && hi - lo > kBisectTol; ++it) {
    double mid = 0.5 * (lo + hi);
    if (allocated(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

namespace {

double posted_payment(const PostedPriceBurn& pp, double own) {
  return own >= pp.price ? pp.price : 0.0;
}

/// Constant-marginal-burn position auctions have a closed walk: the own-bid
/// allocation starts at the burn-threshold inverse and steps up at each
/// competing bid crossed.
double position_payment_const(const PositionAuction& pa, const MechanismSpec& m,
                              const Distribution& d, const BidProfile& bids, std::size_t rank) {
  const double own = bids.at_rank(rank);
  const double beta = pa.marginal_burn(1);
  if (!(g_of(m, d, own) > beta)) return 0.0;
  // Smallest bid that clears the burn threshold. When even the lowest type
  // clears it (an everywhere-allocating auction), the curve starts at 0.
  const double r =
      g_of(m, d, 0.0) > beta ? 0.0 : g_inverse(m, d, beta);

  std::vector<double> crossed;  // others strictly between r and own
  std::size_t gt_own = 0;
  std::size_t eq_own = 0;
  for (std::size_t i = 0; i < bids.size(); ++i) {
    if (i == rank) continue;
    double o = bids.at_rank(i);
    if (o <= r) continue;
    if (o > own) {
      ++gt_own;
    } else if (o == own) {
      ++eq_own;
    } else {
      crossed.push_back(o);
    }
  }
  std::sort(crossed.begin(), crossed.end());

  // #others above the probe, starting just above the threshold r.
  std::size_t cnt = gt_own + eq_own + crossed.size();
  double pay = r * pa.weights.at(cnt + 1);
  for (std::size_t k = 0; k < crossed.size();) {
    std::size_t k2 = k;
    while (k2 < crossed.size() && crossed[k2] == crossed[k]) ++k2;
    std::size_t after = cnt - (k2 - k);
    pay += crossed[k] * (pa.weights.at(after + 1) - pa.weights.at(cnt + 1));
    cnt = after;
    k = k2;
  }
  if (eq_own > 0) {
    // The bid ranks above equal values, so the final step lands at own itself.
    pay += own * (pa.weights.at(gt_own + 1) - pa.weights.at(gt_own + eq_own + 1));
  }
  return pay;
}

double genpos_payment_quadrature(const GeneralizedPositionAuction& gp, const BidProfile& bids,
                                 std::size_t rank) {
  const double own = bids.at_rank(rank);
  const auto& curves = gp.curves;
  const double alloc_own = curves.at(rank + 1, own);
  if (own < curves.gamma) return 0.0;
  if (own == curves.gamma) return own * alloc_own;  // the curve jumps at its start

  // Integrate the own-bid allocation from the curve start up to the bid,
  // rank-constant between competing bids; 64-node Gauss-Legendre per segment.
  std::vector<double> brk;
  brk.push_back(curves.gamma);
  for (std::size_t i = 0; i < bids.size(); ++i) {
    if (i == rank) continue;
    double o = bids.at_rank(i);
    if (o > curves.gamma && o < own) brk.push_back(o);
  }
  brk.push_back(own);
  std::sort(brk.begin(), brk.end());

  const auto& gl = GaussLegendre64::get();
  double integral = 0.0;
  for (std::size_t s = 0; s + 1 < brk.size(); ++s) {
    double a = brk[s], b = brk[s + 1];
    if (b <= a) continue;
    double mid = 0.5 * (a + b);
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < bids.size(); ++i) {
      if (i != rank && bids.at_rank(i) > mid) ++cnt;
    }
    integral += gl.integrate([&](double z) { return curves.at(cnt + 1, z); }, a, b);
  }
  return own * alloc_own - integral;
}

}  // namespace

double payment_identity(const MechanismSpec& m, const Distribution& d, const BidProfile& bids,
                        std::size_t rank) {
  if (rank >= bids.size()) throw DomainError("payment_identity: rank out of range");
  if (auto* pp = m.as<PostedPriceBurn>()) {
    return posted_payment(*pp, bids.at_rank(rank));
  }
  if (m.as<DeterministicSchedule>()) {
    std::vector<double> a = allocate(m, d, bids);
    if (a[rank] < 0.5) return 0.0;
    double cb = critical_bid(m, d, bids, rank);
    return cb == kInf ? 0.0 : cb;
  }
  if (auto* pa = m.as<PositionAuction>()) {
    if (pa->constant_marginal_burn()) {
      return position_payment_const(*pa, m, d, bids, rank);
    }
    // Per-rank burns: generic exact path over the monotone own-bid step
    // function, with a coarse monotonicity pre-check.
    OwnBidAlloc alloc(m, d, bids, rank);
    const double own = bids.at_rank(rank);
    double prev = -1.0;
    for (int k = 0; k <= 64; ++k) {
      double z = own * static_cast<double>(k) / 64.0;
      double a = alloc(z);
      if (a < prev - 1e-12) {
        throw IncentiveViolationError("own-bid allocation is not monotone",
                                      own * (static_cast<double>(k) - 1.0) / 64.0, z);
      }
      prev = std::max(prev, a);
    }
    return step_function_payment([&](double z) { return alloc(z); }, own,
                                 std::max(1.0, own));
  }
  const auto& gp = std::get<GeneralizedPositionAuction>(m.family);
  return genpos_payment_quadrature(gp, bids, rank);
}

std::vector<double> payments(const MechanismSpec& m, const Distribution& d,
                             const BidProfile& bids) {
  std::vector<double> out(bids.size());
  for (std::size_t i = 0; i < bids.size(); ++i) out[i] = payment_identity(m, d, bids, i);
  return out;
}

// ---------------------------------------------------------------------------
// Utility function and the burn identity
// ---------------------------------------------------------------------------

UtilityFunction::UtilityFunction(MechanismSpec m, Distribution d)
    : m_(std::move(m)), d_(std::move(d)) {}

double UtilityFunction::operator()(std::span<const double> g_values) const {
  std::vector<double> g(g_values.begin(), g_values.end());
  std::sort(g.begin(), g.end(), std::greater<double>());
  const std::size_t n = g.size();

  if (auto* pp = m_.as<PostedPriceBurn>()) {
    const double b = pp->effective_burn();
    double u = 0.0;
    for (double gi : g) u += std::max(gi - b, 0.0);
    return u;
  }
  if (auto* ds = m_.as<DeterministicSchedule>()) {
    std::size_t t_cap = std::min(n, ds->max_block_size());
    if (m_.capacity.is_finite) {
      t_cap = std::min(t_cap, static_cast<std::size_t>(std::floor(m_.capacity.omega + 1e-12)));
    }
    double best = -ds->block_reward_burn;
    double prefix = 0.0;
    for (std::size_t t = 1; t <= t_cap; ++t) {
      prefix += g[t - 1];
      double b = ds->burn_for(t);
      if (b < kInf) best = std::max(best, prefix - b);
    }
    return best;
  }
  if (auto* pa = m_.as<PositionAuction>()) {
    double best = 0.0;
    double prefix = 0.0;
    for (std::size_t t = 1; t <= n; ++t) {
      prefix += (g[t - 1] - pa->marginal_burn(t)) * pa->weights.at(t);
      best = std::max(best, prefix);
    }
    return best - pa->block_reward_burn;
  }
  const auto& gp = std::get<GeneralizedPositionAuction>(m_.family);
  // Quadrature route: int_0^{g_i} x_i(g^{-1}(s)) ds by adaptive Simpson with
  // a split at the curve-start breakpoint.
  double u = -gp.block_reward_burn;
  const double s_gamma =
      m_.objective == ObjectiveSpace::Virtual
          ? (gp.curves.gamma >= d_.support_lo() &&
                     (!d_.bounded() || gp.curves.gamma <= d_.support_hi())
                 ? d_.virtual_value(gp.curves.gamma)
                 : kInf)
          : gp.curves.gamma;
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = g[i];
    if (gi <= 0.0) continue;
    const std::size_t t = i + 1;
    auto integrand = [&](double s) {
      double w = m_.objective == ObjectiveSpace::Virtual ? d_.inverse_virtual_value(s) : s;
      return gp.curves.at(t, w);
    };
    double lo_split = std::clamp(s_gamma, 0.0, gi);
    if (lo_split > 0.0) u += AdaptiveSimpson::integrate(integrand, 0.0, lo_split);
    if (gi > lo_split) u += AdaptiveSimpson::integrate(integrand, lo_split, gi);
  }
  return u;
}

UtilityFunction smoothed_utility(const MechanismSpec& m, const Distribution& d) {
  return UtilityFunction(m, d);
}

double burn_from_identity(const MechanismSpec& m, const Distribution& d,
                          const BidProfile& bids) {
  std::vector<double> alloc = allocate(m, d, bids);
  std::vector<double> g(bids.size());
  for (std::size_t i = 0; i < bids.size(); ++i) g[i] = g_of(m, d, bids.at_rank(i));
  UtilityFunction u(m, d);
  double surplus = 0.0;
  for (std::size_t i = 0; i < bids.size(); ++i) surplus += g[i] * alloc[i];
  return surplus - u(g);
}

GradientCheckResult gradient_check(const UtilityFunction& u, const MechanismSpec& m,
                                   const Distribution& d, const BidProfile& bids) {
  GradientCheckResult res;
  std::vector<double> alloc = allocate(m, d, bids);
  std::vector<double> g(bids.size());
  for (std::size_t i = 0; i < bids.size(); ++i) g[i] = g_of(m, d, bids.at_rank(i));
  const double u0 = u(g);

  for (std::size_t i = 0; i < g.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(g[i]));
    bool near_tie = std::abs(g[i]) <= 2.0 * h;
    for (std::size_t j = 0; j < g.size() && !near_tie; ++j) {
      if (j != i && std::abs(g[i] - g[j]) <= 2.0 * h) near_tie = true;
    }
    if (near_tie) {
      ++res.coords_skipped;
      continue;
    }
    std::vector<double> gp = g, gm = g;
    gp[i] += h;
    gm[i] -= h;
    const double up = u(gp);
    const double um = u(gm);
    const double central = (up - um) / (2.0 * h);
    const double s_plus = (up - u0) / h;
    const double s_minus = (u0 - um) / h;
    if (std::abs(s_plus - s_minus) > 1e-3 * (1.0 + std::abs(central))) {
      ++res.coords_skipped;  // kink between the probes
      continue;
    }
    ++res.coords_checked;
    res.max_abs_deviation = std::max(res.max_abs_deviation, std::abs(central - alloc[i]));
  }
  res.status = (res.coords_checked == 0 && !g.empty()) ? GradientCheckResult::Status::AtBreakpoint
                                                       : GradientCheckResult::Status::Ok;
  return res;
}

double payment_genpos_closed(const MechanismSpec& m, const Distribution& d,
                             const BidProfile& bids, std::size_t rank) {
  auto* gp = m.as<GeneralizedPositionAuction>();
  if (!gp) throw UnsupportedQueryError("payment_genpos_closed: not a generalized position auction");
  const std::size_t n = bids.size();
  const double v_bottom = g_inverse(m, d, 0.0);
  const auto& c = gp->curves;
  double pay = bids.at_rank(rank) * c.at(rank + 1, bids.at_rank(rank));
  for (std::size_t j = rank; j < n; ++j) {
    const double hi = bids.at_rank(j);
    const double lo = j + 1 < n ? bids.at_rank(j + 1) : v_bottom;
    pay -= c.integral(j + 1, lo, hi);
  }
  return pay;
}

double burn_genpos_closed(const MechanismSpec& m, const Distribution& d,
                          const BidProfile& bids) {
  auto* gp = m.as<GeneralizedPositionAuction>();
  if (!gp) throw UnsupportedQueryError("burn_genpos_closed: not a generalized position auction");
  std::vector<double> alloc = allocate(m, d, bids);
  return direct_burn(m, d, bids, alloc);
}

}  // namespace tfm
