#include "tfm/mech.hpp"

#include <algorithm>
#include <cmath>

#include "tfm/identity.hpp"
#include "tfm/quadrature.hpp"

namespace tfm {

// ---------------------------------------------------------------------------
// DeterministicSchedule
// ---------------------------------------------------------------------------

double DeterministicSchedule::marginal_burn(std::size_t t) const {
  if (t == 0) return 0.0;
  if (t <= marginal_burns.size()) return marginal_burns[t - 1];
  return tail == ScheduleTail::ConstantLast ? marginal_burns.back() : kInf;
}

double DeterministicSchedule::burn_for(std::size_t t) const {
  double b = block_reward_burn;
  for (std::size_t i = 1; i <= t; ++i) {
    double mb = marginal_burn(i);
    if (mb == kInf) return kInf;
    b += mb;
  }
  return b;
}

std::size_t DeterministicSchedule::max_block_size() const {
  return tail == ScheduleTail::Infinite ? marginal_burns.size()
                                        : std::numeric_limits<std::size_t>::max();
}

// ---------------------------------------------------------------------------
// PositionWeights
// ---------------------------------------------------------------------------

double PositionWeights::at(std::size_t t) const {
  if (t == 0) return 1.0;
  switch (kind) {
    case Kind::Harmonic:
      return scale / (static_cast<double>(t) * (static_cast<double>(t) + 1.0));
    case Kind::HarmonicFirst:
      if (t == 1) return first;
      return scale / (static_cast<double>(t) * (static_cast<double>(t) + 1.0));
    case Kind::Constant:
      return value;
    case Kind::List:
      if (t <= values.size()) return values[t - 1];
      return list_tail == ListTail::ConstantLast ? values.back() : 0.0;
  }
  return 0.0;
}

double PositionWeights::partial_sum(std::size_t t) const {
  // sum_{i<=t} scale/(i(i+1)) telescopes to scale * t/(t+1).
  switch (kind) {
    case Kind::Harmonic:
      return scale * static_cast<double>(t) / (static_cast<double>(t) + 1.0);
    case Kind::HarmonicFirst: {
      if (t == 0) return 0.0;
      double tail_part = scale * (static_cast<double>(t) / (static_cast<double>(t) + 1.0) - 0.5);
      return first + (t >= 2 ? tail_part : 0.0);
    }
    case Kind::Constant:
      return value * static_cast<double>(t);
    case Kind::List: {
      double s = 0.0;
      for (std::size_t i = 1; i <= t; ++i) s += at(i);
      return s;
    }
  }
  return 0.0;
}

double PositionWeights::total_sum() const {
  switch (kind) {
    case Kind::Harmonic:
      return scale;
    case Kind::HarmonicFirst:
      return first + scale * 0.5;
    case Kind::Constant:
      return value > 0.0 ? kInf : 0.0;
    case Kind::List: {
      if (list_tail == ListTail::ConstantLast && values.back() > 0.0) return kInf;
      return partial_sum(values.size());
    }
  }
  return kInf;
}

bool PositionWeights::is_constant() const {
  if (kind == Kind::Constant) return true;
  if (kind == Kind::List && list_tail == ListTail::ConstantLast) {
    return std::all_of(values.begin(), values.end(),
                       [&](double v) { return v == values.front(); });
  }
  return false;
}

std::optional<double> PositionWeights::tail_ratio(std::size_t* valid_from) const {
  switch (kind) {
    case Kind::Harmonic:
      // t (x_t - x_{t+1}) = 2 x_{t+1} exactly, every t.
      *valid_from = 1;
      return 2.0;
    case Kind::HarmonicFirst:
      *valid_from = 2;
      return 2.0;
    case Kind::Constant:
      *valid_from = 1;
      return 0.0;
    case Kind::List:
      // Beyond the explicit list both sides vanish (Zero) or differences
      // vanish (ConstantLast); ranks inside the list are checked explicitly.
      *valid_from = values.size() + 1;
      return 0.0;
  }
  return std::nullopt;
}

double PositionAuction::marginal_burn(std::size_t t) const {
  if (t == 0 || marginal_burns.empty()) return 0.0;
  return marginal_burns[std::min(t, marginal_burns.size()) - 1];
}

// ---------------------------------------------------------------------------
// GenPosCurves
// ---------------------------------------------------------------------------

double GenPosCurves::coeff(std::size_t t) const {
  if (t == 0) return 0.0;
  if (t <= custom_coeffs.size()) return custom_coeffs[t - 1];
  return static_cast<double>(t) / (2.0 * (static_cast<double>(t) + 1.0));
}

double GenPosCurves::at(std::size_t t, double w) const {
  if (w < gamma) return 0.0;
  return 1.0 - coeff(t) * std::exp(-(w - gamma));
}

double GenPosCurves::integral(std::size_t t, double a, double b) const {
  if (b <= a) return 0.0;
  a = std::max(a, gamma);
  if (b <= a) return 0.0;
  // int (1 - c e^{-(z-gamma)}) dz = z + c e^{-(z-gamma)}
  const double c = coeff(t);
  auto anti = [&](double z) { return z + c * std::exp(-(z - gamma)); };
  return anti(b) - anti(a);
}

// ---------------------------------------------------------------------------
// MechanismSpec
// ---------------------------------------------------------------------------

const char* MechanismSpec::family_name() const {
  switch (family.index()) {
    case 0: return "posted_price";
    case 1: return "deterministic_schedule";
    case 2: return "position_auction";
    case 3: return "generalized_position";
  }
  return "?";
}

double MechanismSpec::block_reward_burn() const {
  if (auto* p = as<DeterministicSchedule>()) return p->block_reward_burn;
  if (auto* p = as<PositionAuction>()) return p->block_reward_burn;
  if (auto* p = as<GeneralizedPositionAuction>()) return p->block_reward_burn;
  return 0.0;
}

std::vector<std::string> MechanismSpec::validate(const Distribution& d) const {
  std::vector<std::string> warnings;
  const double reserve = d.monopoly_reserve();

  if (auto* pp = as<PostedPriceBurn>()) {
    if (!(pp->price >= 0.0)) throw ConfigError("posted_price: price must be nonnegative");
    if (!(pp->burn_per_user >= 0.0)) throw ConfigError("posted_price: burn must be nonnegative");
    if (capacity.is_finite) {
      throw ConfigError("posted_price: requires infinite capacity (allocates every bid above the price)");
    }
    if (pp->price < reserve - 1e-12) {
      warnings.push_back("posted_price: price below the monopoly reserve");
    }
  } else if (auto* ds = as<DeterministicSchedule>()) {
    if (ds->marginal_burns.empty()) throw ConfigError("schedule: need at least one marginal burn");
    for (double b : ds->marginal_burns) {
      if (!(b >= 0.0)) throw ConfigError("schedule: marginal burns must be nonnegative");
    }
    if (capacity.is_finite) {
      if (ds->tail != ScheduleTail::Infinite) {
        throw ConfigError("schedule: finite capacity requires an infinite tail (bounded block size)");
      }
      if (static_cast<double>(ds->marginal_burns.size()) > capacity.omega + 1e-12) {
        throw ConfigError("schedule: block size bound exceeds capacity");
      }
    }
  } else if (auto* pa = as<PositionAuction>()) {
    for (double b : pa->marginal_burns) {
      if (!(b >= 0.0)) throw ConfigError("position: marginal burns must be nonnegative");
    }
    double prev = 1.0;
    for (std::size_t t = 1; t <= std::max<std::size_t>(64, pa->weights.values.size() + 2); ++t) {
      double x = pa->weights.at(t);
      if (!(x >= 0.0) || x > 1.0 + 1e-12) throw ConfigError("position: weights must lie in [0,1]");
      if (x > prev + 1e-12) throw ConfigError("position: weights must be non-increasing in rank");
      prev = x;
    }
    if (capacity.is_finite && pa->weights.total_sum() > capacity.omega + 1e-9) {
      throw ConfigError("position: total allocation weight exceeds the capacity");
    }
  } else if (auto* gp = as<GeneralizedPositionAuction>()) {
    const auto& c = gp->curves;
    if (!(c.gamma >= 0.0)) throw ConfigError("generalized_position: curve start must be nonnegative");
    double prev = 0.0;
    for (std::size_t t = 1; t <= std::max<std::size_t>(64, c.custom_coeffs.size() + 2); ++t) {
      double a = c.coeff(t);
      if (!(a >= 0.0) || a > 1.0 + 1e-12) {
        throw ConfigError("generalized_position: curve coefficients must lie in [0,1]");
      }
      if (a < prev - 1e-12) {
        throw ConfigError("generalized_position: curves must be non-increasing in rank");
      }
      prev = a;
    }
    if (objective == ObjectiveSpace::Virtual && c.gamma < reserve - 1e-9) {
      throw ConfigError("generalized_position: curves must vanish below the monopoly reserve");
    }
    if (capacity.is_finite) {
      warnings.push_back(
          "generalized_position: with finite capacity only the trivial (never-allocating) "
          "member of this family can be miner simple; results are reported as-is");
    }
  }
  return warnings;
}

// ---------------------------------------------------------------------------
// Objective transform
// ---------------------------------------------------------------------------

double g_of(const MechanismSpec& m, const Distribution& d, double v) {
  if (m.objective == ObjectiveSpace::Value) return v;
  // Off-support bids act as the nearest boundary type: mechanisms stay
  // defined (and monotone) on every probe the payment identity makes.
  return d.virtual_value(std::clamp(v, d.support_lo(), d.support_hi()));
}

double g_inverse(const MechanismSpec& m, const Distribution& d, double g) {
  if (m.objective == ObjectiveSpace::Virtual) return d.inverse_virtual_value(g);
  return std::max(g, 0.0);
}

// ---------------------------------------------------------------------------
// allocate
// ---------------------------------------------------------------------------

namespace {

/// Smallest prefix size maximizing `prefix_objective(t)` over 0..t_cap.
template <class Objective>
std::size_t argmax_prefix(std::size_t t_cap, Objective&& obj) {
  std::size_t best_t = 0;
  double best = obj(0);
  double run = best;
  for (std::size_t t = 1; t <= t_cap; ++t) {
    run = obj(t);
    if (run > best) {
      best = run;
      best_t = t;
    }
  }
  return best_t;
}

}  // namespace

std::vector<double> allocate(const MechanismSpec& m, const Distribution& d,
                             const BidProfile& bids) {
  const std::size_t n = bids.size();
  std::vector<double> alloc(n, 0.0);
  if (n == 0) return alloc;

  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = g_of(m, d, bids.at_rank(i));

  if (auto* pp = m.as<PostedPriceBurn>()) {
    for (std::size_t i = 0; i < n; ++i) alloc[i] = bids.at_rank(i) >= pp->price ? 1.0 : 0.0;
    return alloc;
  }

  if (auto* ds = m.as<DeterministicSchedule>()) {
    std::size_t t_cap = std::min(n, ds->max_block_size());
    if (m.capacity.is_finite) {
      t_cap = std::min(t_cap, static_cast<std::size_t>(std::floor(m.capacity.omega + 1e-12)));
    }
    std::vector<double> prefix(t_cap + 1, 0.0);
    for (std::size_t t = 1; t <= t_cap; ++t) prefix[t] = prefix[t - 1] + g[t - 1];
    std::size_t t_star = argmax_prefix(t_cap, [&](std::size_t t) {
      double b = ds->burn_for(t);
      return b == kInf ? -kInf : prefix[t] - b;
    });
    for (std::size_t i = 0; i < t_star; ++i) alloc[i] = 1.0;
    return alloc;
  }

  if (auto* pa = m.as<PositionAuction>()) {
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t t = 1; t <= n; ++t) {
      prefix[t] = prefix[t - 1] + (g[t - 1] - pa->marginal_burn(t)) * pa->weights.at(t);
    }
    std::size_t t_star = argmax_prefix(n, [&](std::size_t t) { return prefix[t]; });
    for (std::size_t i = 0; i < t_star; ++i) alloc[i] = pa->weights.at(i + 1);
    return alloc;
  }

  const auto& gp = std::get<GeneralizedPositionAuction>(m.family);
  for (std::size_t i = 0; i < n; ++i) {
    // Curves vanish below the monopoly reserve (validated), which is the
    // g-threshold cutoff: never allocate a bid with negative objective value.
    alloc[i] = gp.curves.at(i + 1, bids.at_rank(i));
  }
  return alloc;
}

Outcome outcome(const MechanismSpec& m, const Distribution& d, const BidProfile& bids) {
  Outcome o;
  o.alloc = allocate(m, d, bids);
  o.payments = payments(m, d, bids);
  o.burn = burn_from_identity(m, d, bids);
  return o;
}

double miner_revenue(const Outcome& o) {
  double p = 0.0;
  for (double x : o.payments) p += x;
  return p - o.burn;
}

double coalition_utility(const Outcome& o, const BidProfile& bids) {
  double u = 0.0;
  for (std::size_t i = 0; i < bids.size(); ++i) u += bids.at_rank(i) * o.alloc[i];
  return u - o.burn;
}

double direct_burn(const MechanismSpec& m, const Distribution& d, const BidProfile& bids,
                   std::span<const double> alloc) {
  if (auto* pp = m.as<PostedPriceBurn>()) {
    double count = 0.0;
    for (double a : alloc) count += a;
    return pp->effective_burn() * count;
  }
  if (auto* ds = m.as<DeterministicSchedule>()) {
    std::size_t t = 0;
    for (double a : alloc) t += a > 0.5 ? 1 : 0;
    return ds->burn_for(t);
  }
  if (auto* pa = m.as<PositionAuction>()) {
    double b = pa->block_reward_burn;
    for (std::size_t i = 0; i < alloc.size(); ++i) {
      if (alloc[i] > 0.0) b += pa->marginal_burn(i + 1) * alloc[i];
    }
    return b;
  }
  const auto& gp = std::get<GeneralizedPositionAuction>(m.family);
  double b = gp.block_reward_burn;
  for (std::size_t i = 0; i < bids.size(); ++i) {
    double gi = g_of(m, d, bids.at_rank(i));
    b += gi * alloc[i] - genpos_g_integral(gp, m, d, i + 1, bids.at_rank(i));
  }
  return b;
}

double genpos_g_integral(const GeneralizedPositionAuction& gp, const MechanismSpec& m,
                         const Distribution& d, std::size_t rank, double w) {
  const double g_w = g_of(m, d, w);
  if (g_w <= 0.0) return 0.0;
  if (m.objective == ObjectiveSpace::Value) {
    return gp.curves.integral(rank, 0.0, w);
  }
  // Virtual space: int_0^{phi(w)} x(phi^{-1}(s)) ds. With an affine phi
  // (slope k) this is k * int_{phi^{-1}(0)}^{w} x(z) dz, exactly.
  switch (d.kind()) {
    case Distribution::Kind::Exponential:
      return gp.curves.integral(rank, d.monopoly_reserve(), w);
    case Distribution::Kind::Uniform:
      return 2.0 * gp.curves.integral(rank, d.monopoly_reserve(), w);
    default:
      break;
  }
  const double lo = std::max(0.0, g_of(m, d, std::max(gp.curves.gamma, d.support_lo())));
  auto integrand = [&](double s) { return gp.curves.at(rank, d.inverse_virtual_value(s)); };
  double acc = 0.0;
  if (lo > 0.0) acc += AdaptiveSimpson::integrate(integrand, 0.0, std::min(lo, g_w));
  if (g_w > lo) acc += AdaptiveSimpson::integrate(integrand, lo, g_w);
  return acc;
}

std::optional<std::size_t> bid_arity_cap(const MechanismSpec& m) {
  if (auto* ds = m.as<DeterministicSchedule>()) {
    if (ds->tail == ScheduleTail::Infinite) return ds->marginal_burns.size();
  }
  return std::nullopt;
}

std::vector<double> interesting_bids(const MechanismSpec& m, const Distribution& d) {
  std::vector<double> out;
  out.push_back(d.monopoly_reserve());
  if (auto* pp = m.as<PostedPriceBurn>()) {
    out.push_back(pp->price);
    double b = pp->effective_burn();
    if (!d.bounded() || b <= d.phi_at_sup()) out.push_back(g_inverse(m, d, b));
  } else if (auto* ds = m.as<DeterministicSchedule>()) {
    for (std::size_t t = 1; t <= std::min<std::size_t>(4, ds->marginal_burns.size()); ++t) {
      double b = ds->marginal_burn(t);
      if (m.objective == ObjectiveSpace::Virtual && d.bounded() && b > d.phi_at_sup()) continue;
      out.push_back(g_inverse(m, d, b));
    }
  } else if (auto* pa = m.as<PositionAuction>()) {
    for (std::size_t t = 1; t <= std::min<std::size_t>(4, pa->marginal_burns.size()); ++t) {
      double b = pa->marginal_burn(t);
      if (m.objective == ObjectiveSpace::Virtual && d.bounded() && b > d.phi_at_sup()) continue;
      out.push_back(g_inverse(m, d, b));
    }
  } else if (auto* gp = m.as<GeneralizedPositionAuction>()) {
    out.push_back(gp->curves.gamma);
  }
  // Clamp into the support and nudge slightly to both sides of each level.
  std::vector<double> full;
  const double hi = d.bounded() ? d.support_hi() : kInf;
  for (double v : out) {
    for (double delta : {0.0, 1e-6, -1e-6}) {
      double z = v + delta * std::max(1.0, std::abs(v));
      if (z >= d.support_lo() && z <= hi) full.push_back(z);
    }
  }
  std::sort(full.begin(), full.end());
  full.erase(std::unique(full.begin(), full.end()), full.end());
  return full;
}

}  // namespace tfm
