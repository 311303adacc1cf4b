#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "tfm/dist.hpp"
#include "tfm/mech.hpp"
#include "tfm/types.hpp"

namespace tfm {

/// Smallest own bid at which the user at `rank` is allocated, holding the
/// other bids fixed; +inf sentinel when never allocated. Requires the
/// mechanism to be deterministic at that rank (allocation in {0,1});
/// otherwise throws UnsupportedQueryError -- use payment_identity instead.
double critical_bid(const MechanismSpec& m, const Distribution& d, const BidProfile& bids,
                    std::size_t rank);

/// Truthful payment for the user at `rank`: v x(v) - int_0^v x(z) dz over the
/// own-bid allocation curve. Exact breakpoint sums for families whose
/// own-bid allocation is a step function; 64-node Gauss-Legendre per segment
/// for generalized position curves. Throws IncentiveViolationError with a
/// witness pair when own-bid monotonicity fails.
double payment_identity(const MechanismSpec& m, const Distribution& d, const BidProfile& bids,
                        std::size_t rank);

/// All payments at once (same definitions, shared work).
std::vector<double> payments(const MechanismSpec& m, const Distribution& d,
                             const BidProfile& bids);

/// The family's smoothened utility in objective space:
///   schedules            max_t sum_{i<=t} g_(i) - B_t
///   position auctions    max_t sum_{i<=t} (g_(i) - beta_i) x_i - B_0
///   generalized          sum_i int_0^{g_(i)} x_i(g^{-1}(s)) ds - B_0
/// Arguments may be unsorted; evaluation sorts descending. The generalized
/// family evaluates its integrals by adaptive quadrature (the closed-form
/// route lives in direct_burn / payment_genpos_closed for cross-checking).
class UtilityFunction {
 public:
  UtilityFunction(MechanismSpec m, Distribution d);
  double operator()(std::span<const double> g_values) const;
  ObjectiveSpace space() const { return m_.objective; }

 private:
  MechanismSpec m_;
  Distribution d_;
};

UtilityFunction smoothed_utility(const MechanismSpec& m, const Distribution& d);

/// Burn via the identity: sum_i g(v_i) alloc_i - U(g(v)). Equals the
/// family's direct burn formula whenever the mechanism is consistent with
/// its own utility function (covered by tests); reduces to B_0 on empty bids.
double burn_from_identity(const MechanismSpec& m, const Distribution& d,
                          const BidProfile& bids);

struct GradientCheckResult {
  enum class Status { Ok, AtBreakpoint };
  Status status = Status::Ok;
  double max_abs_deviation = 0.0;
  std::size_t coords_checked = 0;
  std::size_t coords_skipped = 0;
};

/// Central finite differences of U against the allocation, coordinate-wise
/// in objective space (step h = 1e-5 max(1,|g|)). Coordinates within 2h of a
/// tie or with materially different one-sided slopes are skipped; if all are,
/// the result is AtBreakpoint (inconclusive) rather than asserting a value.
GradientCheckResult gradient_check(const UtilityFunction& u, const MechanismSpec& m,
                                   const Distribution& d, const BidProfile& bids);

/// Rank-segment closed form for generalized position payments, with the
/// convention that the (n+1)-th value is g_inverse(0):
///   P_i = v_(i) x_i(v_(i)) - sum_{j>=i} int_{v_(j+1)}^{v_(j)} x_j(z) dz.
double payment_genpos_closed(const MechanismSpec& m, const Distribution& d,
                             const BidProfile& bids, std::size_t rank);

/// Closed-form generalized-position burn (the direct formula).
double burn_genpos_closed(const MechanismSpec& m, const Distribution& d,
                          const BidProfile& bids);

/// Payment of a monotone step own-bid allocation, as the sum of
/// breakpoint-level contributions; jump locations found by recursive
/// bisection to 1e-12 absolute. Exposed for tests.
double step_function_payment(const std::function<double(double)>& alloc_at, double own_bid,
                             double scale);

}  // namespace tfm
