#include <doctest.h>

#include <cmath>

#include "tfm/identity.hpp"
#include "tfm/mech.hpp"
#include "tfm/rng.hpp"

using namespace tfm;

namespace {

MechanismSpec posted(double price, double burn) {
  MechanismSpec m;
  m.family = PostedPriceBurn{price, burn, PostedPriceBurn::Route::Miner};
  return m;
}

MechanismSpec schedule(std::vector<double> betas, ScheduleTail tail = ScheduleTail::ConstantLast) {
  MechanismSpec m;
  m.family = DeterministicSchedule{std::move(betas), tail, 0.0};
  return m;
}

MechanismSpec rand_auction(double beta) {
  MechanismSpec m;
  PositionAuction pa;
  pa.weights.kind = PositionWeights::Kind::Harmonic;
  pa.marginal_burns = {beta};
  m.family = pa;
  m.capacity = Capacity::finite(1.0);
  return m;
}

MechanismSpec genpos_example(double gamma) {
  MechanismSpec m;
  GeneralizedPositionAuction gp;
  gp.curves.gamma = gamma;
  m.family = gp;
  return m;
}

}  // namespace

TEST_CASE("critical bids") {
  Distribution d = Distribution::exponential(1.0);

  CHECK(critical_bid(posted(2.0, 1.0), d, BidProfile({3.0, 1.5}), 0) == 2.0);

  MechanismSpec m = schedule({4.0, 3.0}, ScheduleTail::Infinite);
  // Querying the low bidder against a strong competitor: allocated once the
  // pair block wins, i.e. from phi = 3.
  CHECK(critical_bid(m, d, BidProfile({6.0, 5.0}), 1) == doctest::Approx(4.0).epsilon(1e-9));
  // Against a weak competitor the top bidder needs the solo block: phi = 4.
  CHECK(critical_bid(m, d, BidProfile({6.0, 3.5}), 0) == doctest::Approx(5.0).epsilon(1e-9));

  // Randomized ranks have no scalar critical bid.
  CHECK_THROWS_AS(critical_bid(rand_auction(0.6), Distribution::uniform(0.0, 1.0),
                               BidProfile({0.9, 0.85}), 0),
                  UnsupportedQueryError);
}

TEST_CASE("payment identity closed cases") {
  Distribution exp1 = Distribution::exponential(1.0);
  CHECK(payment_identity(posted(2.0, 1.0), exp1, BidProfile({3.0, 1.5}), 0) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(payment_identity(posted(2.0, 1.0), exp1, BidProfile({3.0, 1.5}), 1) == 0.0);

  Distribution uni = Distribution::uniform(0.0, 1.0);
  MechanismSpec pos = rand_auction(0.6);
  BidProfile bids({0.9, 0.85});
  // 0.8 x_2 + 0.85 (x_1 - x_2) = 5/12.
  CHECK(payment_identity(pos, uni, bids, 0) == doctest::Approx(5.0 / 12.0).epsilon(1e-12));
  CHECK(payment_identity(pos, uni, bids, 1) == doctest::Approx(0.8 / 6.0).epsilon(1e-12));
}

TEST_CASE("generalized position payment: quadrature vs closed form") {
  Distribution exp1 = Distribution::exponential(1.0);
  MechanismSpec m = genpos_example(3.0);

  // Single bid at the curve start: no integral mass, pay v * x_1(v).
  BidProfile one({3.0});
  double pq = payment_identity(m, exp1, one, 0);
  CHECK(pq == doctest::Approx(3.0 * 0.75).epsilon(1e-10));
  CHECK(payment_genpos_closed(m, exp1, one, 0) == doctest::Approx(pq).epsilon(1e-8));

  for (int trial = 0; trial < 40; ++trial) {
    Rng rng(stream_seed(3, "id.genpos", static_cast<std::uint64_t>(trial)));
    std::size_t n = 1 + rng.next_u64() % 4;
    std::vector<double> v(n);
    for (auto& x : v) x = 2.5 + 3.0 * rng.uniform01();  // straddles gamma = 3
    BidProfile bids(v);
    for (std::size_t i = 0; i < n; ++i) {
      double q = payment_identity(m, exp1, bids, i);
      double c = payment_genpos_closed(m, exp1, bids, i);
      CHECK(std::abs(q - c) <= 1e-8 * std::max(1.0, std::abs(c)));
    }
    double bq = burn_from_identity(m, exp1, bids);
    double bc = burn_genpos_closed(m, exp1, bids);
    CHECK(std::abs(bq - bc) <= 1e-8 * std::max(1.0, std::abs(bc)));
  }
}

TEST_CASE("smoothed utility values") {
  Distribution exp1 = Distribution::exponential(1.0);
  UtilityFunction u_sched = smoothed_utility(schedule({4.0, 3.0}), exp1);
  std::vector<double> g1{5.0, 4.0};
  CHECK(u_sched(g1) == doctest::Approx(2.0).epsilon(1e-12));

  Distribution uni = Distribution::uniform(0.0, 1.0);
  UtilityFunction u_pos = smoothed_utility(rand_auction(0.6), uni);
  std::vector<double> g2{0.8, 0.7};
  CHECK(u_pos(g2) == doctest::Approx(0.2 * 0.5 + 0.1 / 6.0).epsilon(1e-12));

  std::vector<double> neg{-0.5, -1.0};
  CHECK(u_sched(neg) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(u_pos(neg) == doctest::Approx(0.0).epsilon(1e-12));

  // Evaluation sorts: permuted inputs agree.
  std::vector<double> perm{4.0, 5.0};
  CHECK(u_sched(perm) == u_sched(g1));
}

TEST_CASE("burn identity values") {
  Distribution exp1 = Distribution::exponential(1.0);
  CHECK(burn_from_identity(schedule({4.0, 3.0}), exp1, BidProfile({6.0, 5.0})) ==
        doctest::Approx(7.0).epsilon(1e-12));
  // Tuned posted price as a degenerate schedule: burns phi(price) per user.
  CHECK(burn_from_identity(posted(2.0, 1.0), exp1, BidProfile({3.0})) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(burn_from_identity(schedule({4.0, 3.0}), exp1, BidProfile()) == 0.0);
}

TEST_CASE("payment equivalence for deterministic families") {
  Distribution exp1 = Distribution::exponential(1.0);
  for (const MechanismSpec& m :
       {posted(2.0, 1.0), schedule({4.0, 3.0}), schedule({2.5, 2.0, 1.5})}) {
    for (int trial = 0; trial < 60; ++trial) {
      Rng rng(stream_seed(4, "id.payeq", static_cast<std::uint64_t>(trial)));
      BidProfile bids = exp1.sample(1 + rng.next_u64() % 4, rng.next_u64());
      auto alloc = allocate(m, exp1, bids);
      for (std::size_t i = 0; i < bids.size(); ++i) {
        double pay = payment_identity(m, exp1, bids, i);
        if (alloc[i] > 0.5) {
          CHECK(pay == doctest::Approx(critical_bid(m, exp1, bids, i)).epsilon(1e-9));
        } else {
          CHECK(pay == 0.0);
        }
      }
    }
  }
}

TEST_CASE("burn consistency: identity equals the direct family formula") {
  Distribution exp1 = Distribution::exponential(1.0);
  Distribution uni = Distribution::uniform(0.0, 1.0);
  struct Case {
    MechanismSpec m;
    const Distribution* d;
  };
  std::vector<Case> cases;
  cases.push_back({posted(2.0, 1.0), &exp1});  // tuned: burn = phi(price)
  cases.push_back({schedule({4.0, 3.0}), &exp1});
  cases.push_back({rand_auction(0.6), &uni});
  cases.push_back({genpos_example(3.0), &exp1});

  for (const auto& c : cases) {
    for (int trial = 0; trial < 60; ++trial) {
      Rng rng(stream_seed(5, "id.burncons", static_cast<std::uint64_t>(trial)));
      BidProfile bids = c.d->sample(rng.next_u64() % 5, rng.next_u64());
      auto alloc = allocate(c.m, *c.d, bids);
      double direct = direct_burn(c.m, *c.d, bids, alloc);
      double ident = burn_from_identity(c.m, *c.d, bids);
      CHECK(std::abs(direct - ident) <= 1e-8 * std::max(1.0, std::abs(direct)));

      // Individual rationality for truthful bidders: pay at most bid * alloc.
      auto pays = payments(c.m, *c.d, bids);
      for (std::size_t i = 0; i < bids.size(); ++i) {
        CHECK(pays[i] <= bids.at_rank(i) * alloc[i] + 1e-9);
        CHECK(pays[i] >= -1e-12);
      }
    }
  }
}

TEST_CASE("utility functions are convex and append-invariant") {
  Distribution exp1 = Distribution::exponential(1.0);
  Distribution uni = Distribution::uniform(0.0, 1.0);
  struct Case {
    MechanismSpec m;
    const Distribution* d;
    double glo, ghi;
  };
  std::vector<Case> cases;
  cases.push_back({schedule({4.0, 3.0}), &exp1, -1.0, 6.0});
  cases.push_back({rand_auction(0.6), &uni, -1.0, 1.0});
  cases.push_back({genpos_example(3.0), &exp1, -1.0, 6.0});
  cases.push_back({posted(2.0, 1.0), &exp1, -1.0, 6.0});

  for (const auto& c : cases) {
    UtilityFunction u = smoothed_utility(c.m, *c.d);
    for (int trial = 0; trial < 100; ++trial) {
      Rng rng(stream_seed(6, "id.convex", static_cast<std::uint64_t>(trial)));
      std::size_t n = 1 + rng.next_u64() % 4;
      std::vector<double> a(n), b(n), mix(n);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = rng.uniform(c.glo, c.ghi);
        b[i] = rng.uniform(c.glo, c.ghi);
      }
      for (double lambda : {0.25, 0.5, 0.75}) {
        for (std::size_t i = 0; i < n; ++i) mix[i] = lambda * a[i] + (1 - lambda) * b[i];
        CHECK(u(mix) <= lambda * u(a) + (1 - lambda) * u(b) + 1e-9);
      }
      // Appending nonpositive coordinates never changes the utility.
      std::vector<double> ext = a;
      ext.push_back(-rng.uniform01());
      ext.push_back(0.0);
      CHECK(u(ext) == doctest::Approx(u(a)).epsilon(1e-9));
    }
  }
}

TEST_CASE("gradient check matches allocations off breakpoints") {
  Distribution exp1 = Distribution::exponential(1.0);
  Distribution uni = Distribution::uniform(0.0, 1.0);

  {
    MechanismSpec m = posted(2.0, 1.0);
    UtilityFunction u = smoothed_utility(m, exp1);
    auto res = gradient_check(u, m, exp1, BidProfile({3.0, 1.5}));
    CHECK(res.status == GradientCheckResult::Status::Ok);
    CHECK(res.max_abs_deviation <= 1e-6);
  }
  {
    MechanismSpec m = rand_auction(0.6);
    UtilityFunction u = smoothed_utility(m, uni);
    auto res = gradient_check(u, m, uni, BidProfile({0.9, 0.85}));
    CHECK(res.status == GradientCheckResult::Status::Ok);
    CHECK(res.max_abs_deviation <= 1e-6);
  }
  {
    MechanismSpec m = genpos_example(3.0);
    UtilityFunction u = smoothed_utility(m, exp1);
    auto res = gradient_check(u, m, exp1, BidProfile({3.5}));
    CHECK(res.status == GradientCheckResult::Status::Ok);
    CHECK(res.max_abs_deviation <= 1e-5);
  }
  {
    // Zero gradient below the reserve.
    MechanismSpec m = schedule({4.0, 3.0});
    UtilityFunction u = smoothed_utility(m, exp1);
    auto res = gradient_check(u, m, exp1, BidProfile({6.0, 0.5}));
    CHECK(res.status == GradientCheckResult::Status::Ok);
    CHECK(res.max_abs_deviation <= 1e-6);
  }
  {
    // A bid parked exactly on the schedule threshold is a breakpoint: the
    // probe reports it instead of asserting a gradient.
    MechanismSpec m = schedule({4.0});
    UtilityFunction u = smoothed_utility(m, exp1);
    auto res = gradient_check(u, m, exp1, BidProfile({5.0}));
    CHECK(res.status == GradientCheckResult::Status::AtBreakpoint);
  }
}

TEST_CASE("non-monotone own-bid allocation raises an incentive violation") {
  auto dip = [](double z) { return z < 1.0 ? 0.5 : (z < 2.0 ? 0.2 : 0.8); };
  CHECK_THROWS_AS(step_function_payment(dip, 3.0, 1.0), IncentiveViolationError);
  // Monotone step: payment sums the breakpoint levels.
  auto step = [](double z) { return z < 1.0 ? 0.0 : (z < 2.0 ? 0.25 : 1.0); };
  CHECK(step_function_payment(step, 3.0, 1.0) ==
        doctest::Approx(1.0 * 0.25 + 2.0 * 0.75).epsilon(1e-9));
}

TEST_CASE("supports with a positive floor: probes below it stay defined") {
  Distribution d = Distribution::uniform(0.3, 1.0);  // phi(v) = 2v - 1

  MechanismSpec pp = posted(0.5, 0.0);
  BidProfile pb({0.7, 0.4});
  CHECK(payment_identity(pp, d, pb, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(payment_identity(pp, d, pb, 1) == 0.0);

  MechanismSpec sched = schedule({0.1});
  BidProfile sb({0.8});
  CHECK(critical_bid(sched, d, sb, 0) == doctest::Approx(0.55).epsilon(1e-9));
  CHECK(payment_identity(sched, d, sb, 0) == doctest::Approx(0.55).epsilon(1e-9));

  // A threshold every type clears: the own-bid curve starts at zero, so the
  // bottom rank rides free. The constant-burn fast walk and the generic
  // jump finder must agree.
  Distribution high = Distribution::uniform(0.8, 1.0);  // phi(v) = 2v - 1 >= 0.6
  MechanismSpec fast;
  PositionAuction fa;
  fa.weights.kind = PositionWeights::Kind::Harmonic;
  fa.marginal_burns = {0.5};
  fast.family = fa;
  MechanismSpec generic = fast;
  std::get<PositionAuction>(generic.family).marginal_burns = {0.5, 0.5};  // forces generic path
  for (int trial = 0; trial < 20; ++trial) {
    BidProfile bids = high.sample(1 + trial % 3, stream_seed(9, "id.floor", trial));
    for (std::size_t i = 0; i < bids.size(); ++i) {
      double pf = payment_identity(fast, high, bids, i);
      double pg = payment_identity(generic, high, bids, i);
      CHECK(pf == doctest::Approx(pg).epsilon(1e-9));
    }
  }
}

TEST_CASE("per-rank burn lists use the generic exact path") {
  Distribution exp1 = Distribution::exponential(1.0);
  MechanismSpec m;
  PositionAuction pa;
  pa.weights.kind = PositionWeights::Kind::List;
  pa.weights.values = {1.0, 1.0};
  pa.weights.list_tail = PositionWeights::ListTail::Zero;
  pa.marginal_burns = {4.0, 3.0};
  m.family = pa;

  // With unit weights and per-rank burns this reproduces the two-rank
  // schedule; payments must match its critical bids.
  MechanismSpec sched = schedule({4.0, 3.0}, ScheduleTail::Infinite);
  BidProfile bids({6.0, 5.0});
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(payment_identity(m, exp1, bids, i) ==
          doctest::Approx(payment_identity(sched, exp1, bids, i)).epsilon(1e-9));
  }
}
