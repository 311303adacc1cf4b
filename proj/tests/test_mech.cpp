#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "tfm/identity.hpp"
#include "tfm/mech.hpp"
#include "tfm/rng.hpp"

using namespace tfm;

namespace {

MechanismSpec posted(double price, double burn,
                     PostedPriceBurn::Route route = PostedPriceBurn::Route::Miner) {
  MechanismSpec m;
  m.family = PostedPriceBurn{price, burn, route};
  return m;
}

MechanismSpec schedule(std::vector<double> betas, ScheduleTail tail = ScheduleTail::ConstantLast,
                       double b0 = 0.0) {
  MechanismSpec m;
  m.family = DeterministicSchedule{std::move(betas), tail, b0};
  return m;
}

MechanismSpec rand_auction(double beta, double scale = 1.0) {
  MechanismSpec m;
  PositionAuction pa;
  pa.weights.kind = PositionWeights::Kind::Harmonic;
  pa.weights.scale = scale;
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

/// Independent oracle: best burn-feasible SUBSET by exhaustive enumeration.
/// For count-based burns the best subset of each size is the top prefix, so
/// the subset optimum must match the prefix argmax value.
double subset_oracle_value(const MechanismSpec& m, const Distribution& d,
                           const BidProfile& bids) {
  const std::size_t n = bids.size();
  REQUIRE(n <= 16);
  double best = -kInf;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::size_t size = 0;
    double surplus = 0.0;
    // Rank weights apply in descending bid order within the subset.
    std::size_t rank = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask & (std::size_t{1} << i))) continue;
      ++size;
      ++rank;
      double g = g_of(m, d, bids.at_rank(i));
      if (auto* pa = m.as<PositionAuction>()) {
        surplus += (g - pa->marginal_burn(rank)) * pa->weights.at(rank);
      } else {
        surplus += g;
      }
    }
    double value;
    if (auto* ds = m.as<DeterministicSchedule>()) {
      double burn = ds->burn_for(size);
      if (burn == kInf) continue;
      value = surplus - burn;
    } else if (m.as<PositionAuction>()) {
      value = surplus - m.block_reward_burn();
    } else {
      continue;
    }
    best = std::max(best, value);
  }
  return best;
}

double mechanism_objective(const MechanismSpec& m, const Distribution& d,
                           const BidProfile& bids) {
  auto alloc = allocate(m, d, bids);
  double obj = -direct_burn(m, d, bids, alloc);
  for (std::size_t i = 0; i < bids.size(); ++i) obj += g_of(m, d, bids.at_rank(i)) * alloc[i];
  return obj;
}

}  // namespace

TEST_CASE("posted price allocation and outcome") {
  Distribution d = Distribution::exponential(1.0);
  MechanismSpec m = posted(2.0, 1.0);
  BidProfile bids({3.0, 1.5});

  auto alloc = allocate(m, d, bids);
  CHECK(alloc[0] == 1.0);
  CHECK(alloc[1] == 0.0);

  Outcome o = outcome(m, d, bids);
  CHECK(o.payments[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(o.payments[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(o.burn == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(miner_revenue(o) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(coalition_utility(o, bids) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("two-rank schedule golden outcome") {
  Distribution d = Distribution::exponential(1.0);
  MechanismSpec m = schedule({4.0, 3.0}, ScheduleTail::Infinite);
  BidProfile bids({6.0, 5.0});

  auto alloc = allocate(m, d, bids);
  CHECK(alloc[0] == 1.0);
  CHECK(alloc[1] == 1.0);
  // Brute force over all four subsets agrees with the prefix argmax.
  CHECK(mechanism_objective(m, d, bids) ==
        doctest::Approx(subset_oracle_value(m, d, bids)).epsilon(1e-12));

  Outcome o = outcome(m, d, bids);
  CHECK(o.payments[0] == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(o.payments[1] == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(o.burn == doctest::Approx(7.0).epsilon(1e-9));
  CHECK(miner_revenue(o) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(coalition_utility(o, bids) == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("position auction allocates rank weights above the threshold") {
  Distribution d = Distribution::uniform(0.0, 1.0);
  MechanismSpec m = rand_auction(0.6);
  BidProfile bids({0.9, 0.85});

  auto alloc = allocate(m, d, bids);
  CHECK(alloc[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(alloc[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("empty profiles") {
  Distribution d = Distribution::exponential(1.0);
  for (const MechanismSpec& m : {posted(2.0, 1.0), schedule({4.0, 3.0}), rand_auction(0.6)}) {
    BidProfile empty;
    CHECK(allocate(m, d, empty).empty());
    Outcome o = outcome(m, d, empty);
    CHECK(o.payments.empty());
    CHECK(o.burn == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(miner_revenue(o) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(coalition_utility(o, empty) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("prefix optimality against exhaustive subset enumeration") {
  Distribution exp1 = Distribution::exponential(1.0);
  Distribution uni = Distribution::uniform(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng(stream_seed(0x5EED, "mech.prefix", static_cast<std::uint64_t>(trial)));
    std::size_t n = 1 + rng.next_u64() % 6;

    MechanismSpec ms = schedule({4.0, 3.0, 2.5, 2.5, 2.0});
    BidProfile be = exp1.sample(n, rng.next_u64());
    CHECK(mechanism_objective(ms, exp1, be) ==
          doctest::Approx(subset_oracle_value(ms, exp1, be)).epsilon(1e-12));

    MechanismSpec mp = rand_auction(0.6);
    BidProfile bu = uni.sample(n, rng.next_u64());
    CHECK(mechanism_objective(mp, uni, bu) ==
          doctest::Approx(subset_oracle_value(mp, uni, bu)).epsilon(1e-12));
  }
}

TEST_CASE("raising a bid never lowers that user's allocation") {
  Distribution exp1 = Distribution::exponential(1.0);
  Distribution uni = Distribution::uniform(0.0, 1.0);
  struct Case {
    MechanismSpec m;
    const Distribution* d;
  };
  std::vector<Case> cases;
  cases.push_back({posted(2.0, 1.0), &exp1});
  cases.push_back({schedule({4.0, 3.0}), &exp1});
  cases.push_back({rand_auction(0.6), &uni});
  cases.push_back({genpos_example(3.0), &exp1});

  for (const auto& c : cases) {
    for (int trial = 0; trial < 20; ++trial) {
      Rng rng(stream_seed(1, "mech.mono", static_cast<std::uint64_t>(trial)));
      std::size_t n = 2 + rng.next_u64() % 3;
      BidProfile bids = c.d->sample(n, rng.next_u64());
      std::size_t who = rng.next_u64() % n;
      BidProfile others = bids.without_rank(who);
      double prev = -1.0;
      const double vmax = c.d->bounded() ? c.d->support_hi() : c.d->quantile(0.999);
      for (int k = 0; k <= 64; ++k) {
        double z = c.d->support_lo() + (vmax - c.d->support_lo()) * k / 64.0;
        BidProfile probe = others.with_bid(z);
        std::size_t rank = 0;
        while (probe.at_rank(rank) != z) ++rank;
        double a = allocate(c.m, *c.d, probe)[rank];
        CHECK(a >= prev - 1e-12);
        prev = std::max(prev, a);
      }
    }
  }
}

TEST_CASE("negative virtual values never allocated; appending them is neutral") {
  Distribution exp1 = Distribution::exponential(1.0);
  ConditionalNegVV neg(exp1);
  MechanismSpec pos_exp;  // constant-weight position auction on the unbounded prior
  {
    PositionAuction pa;
    pa.weights.kind = PositionWeights::Kind::Constant;
    pa.weights.value = 0.25;
    pa.marginal_burns = {2.0};
    pos_exp.family = pa;
  }
  for (const MechanismSpec& m :
       {posted(2.0, 1.0), schedule({4.0, 3.0}), genpos_example(3.0), pos_exp}) {
    for (int trial = 0; trial < 50; ++trial) {
      Rng rng(stream_seed(2, "mech.negvv", static_cast<std::uint64_t>(trial)));
      std::size_t n = 1 + rng.next_u64() % 4;
      BidProfile bids = exp1.sample(n, rng.next_u64());
      auto alloc = allocate(m, exp1, bids);
      for (std::size_t i = 0; i < n; ++i) {
        if (exp1.virtual_value(bids.at_rank(i)) < -1e-12) CHECK(alloc[i] == 0.0);
      }
      double base = mechanism_objective(m, exp1, bids);
      for (int k = 0; k < 16; ++k) {
        BidProfile ext = bids.with_bid(neg.draw_one(rng));
        // The appended bid sits below every allocated one, so the original
        // users' terms are the full objective.
        CHECK(mechanism_objective(m, exp1, ext) == doctest::Approx(base).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("anonymity: duplicate values are interchangeable") {
  Distribution d = Distribution::exponential(1.0);
  MechanismSpec m = schedule({4.0, 3.0});
  BidProfile bids({5.5, 5.5});
  auto alloc = allocate(m, d, bids);
  CHECK(alloc[0] == alloc[1]);  // the tie-break never splits equal values here

  // Rank monotonicity on strictly ordered bids.
  BidProfile ordered({6.0, 5.0, 4.9});
  auto a2 = allocate(m, d, ordered);
  for (std::size_t i = 1; i < a2.size(); ++i) CHECK(a2[i - 1] >= a2[i]);
}

TEST_CASE("spec validation") {
  Distribution exp1 = Distribution::exponential(1.0);
  Distribution uni = Distribution::uniform(0.0, 1.0);

  // Posted price needs infinite capacity.
  MechanismSpec pp = posted(2.0, 1.0);
  pp.capacity = Capacity::finite(1.0);
  CHECK_THROWS_AS(pp.validate(exp1), ConfigError);

  // Finite capacity requires a bounded schedule.
  MechanismSpec ds = schedule({4.0, 3.0}, ScheduleTail::ConstantLast);
  ds.capacity = Capacity::finite(2.0);
  CHECK_THROWS_AS(ds.validate(exp1), ConfigError);
  MechanismSpec ok = schedule({4.0, 3.0}, ScheduleTail::Infinite);
  ok.capacity = Capacity::finite(2.0);
  CHECK_NOTHROW(ok.validate(exp1));

  // Position weights must fit the capacity.
  MechanismSpec pa = rand_auction(0.6, 2.0);  // weights sum to 2
  CHECK_THROWS_AS(pa.validate(uni), ConfigError);

  // Weight lists must be non-increasing and within [0,1].
  MechanismSpec bad;
  PositionAuction bl;
  bl.weights.kind = PositionWeights::Kind::List;
  bl.weights.values = {0.2, 0.5};
  bl.marginal_burns = {0.6};
  bad.family = bl;
  CHECK_THROWS_AS(bad.validate(uni), ConfigError);

  // Curves must vanish below the monopoly reserve in virtual space.
  MechanismSpec gp = genpos_example(0.5);
  CHECK_THROWS_AS(gp.validate(exp1), ConfigError);
  MechanismSpec gp_ok = genpos_example(3.0);
  CHECK_NOTHROW(gp_ok.validate(exp1));

  // Generalized family with finite capacity: documented-limitation warning.
  MechanismSpec gp_warn = genpos_example(3.0);
  gp_warn.capacity = Capacity::finite(4.0);
  CHECK_FALSE(gp_warn.validate(exp1).empty());

  // Negative burns are rejected.
  CHECK_THROWS_AS(schedule({-1.0}).validate(exp1), ConfigError);
}

TEST_CASE("harmonic weight sums") {
  PositionWeights w;
  w.kind = PositionWeights::Kind::Harmonic;
  w.scale = 1.0;
  CHECK(w.at(1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(w.at(2) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(w.total_sum() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(w.partial_sum(1000000) == doctest::Approx(1.0).epsilon(2e-6));

  PositionWeights lit;
  lit.kind = PositionWeights::Kind::HarmonicFirst;
  lit.first = 0.5;
  lit.scale = 0.5;
  CHECK(lit.at(1) == 0.5);
  CHECK(lit.at(2) == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
  CHECK(lit.total_sum() == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("generalized curves: values and closed-form integrals") {
  GenPosCurves c;
  c.gamma = 3.0;
  CHECK(c.at(1, 2.9) == 0.0);
  CHECK(c.at(1, 3.0) == doctest::Approx(0.75).epsilon(1e-15));  // 1 - 1/4
  CHECK(c.at(1, 3.5) == doctest::Approx(1.0 - std::exp(-0.5) / 4.0).epsilon(1e-15));
  CHECK(c.at(2, 3.0) == doctest::Approx(1.0 - 1.0 / 3.0).epsilon(1e-15));

  // Closed-form integral vs a fine Riemann sum of the curve itself.
  double closed = c.integral(1, 3.0, 5.0);
  double riemann = 0.0;
  const int steps = 200000;
  for (int i = 0; i < steps; ++i) {
    riemann += c.at(1, 3.0 + 2.0 * (i + 0.5) / steps) * (2.0 / steps);
  }
  CHECK(closed == doctest::Approx(riemann).epsilon(1e-9));
  CHECK(c.integral(1, 0.0, 3.0) == 0.0);  // vanishes below gamma
}
