#include <doctest.h>

#include <atomic>
#include <vector>

#include "tfm/parallel.hpp"
#include "tfm/report.hpp"
#include "tfm/rng.hpp"
#include "tfm/verify.hpp"

using namespace tfm;

TEST_CASE("stream seeds are stable and index-separated") {
  CHECK(stream_seed(1, "a", 0) == stream_seed(1, "a", 0));
  CHECK(stream_seed(1, "a", 0) != stream_seed(1, "a", 1));
  CHECK(stream_seed(1, "a", 0) != stream_seed(1, "b", 0));
  CHECK(stream_seed(1, "a", 0) != stream_seed(2, "a", 0));
}

TEST_CASE("for_each_index covers every index exactly once in any mode") {
  for (int jobs : {1, 0, 3}) {
    std::vector<std::atomic<int>> hits(1000);
    for_each_index(1000, ExecPolicy{jobs}, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);
  }
}

TEST_CASE("exceptions propagate out of the parallel region") {
  CHECK_THROWS_AS(for_each_index(64, ExecPolicy::parallel(),
                                 [&](std::size_t i) {
                                   if (i == 17) throw DomainError("boom");
                                 }),
                  DomainError);
}

TEST_CASE("serial reference and OpenMP kernels agree bit-for-bit") {
  Distribution exp1 = Distribution::exponential(1.0);
  Distribution uni = Distribution::uniform(0.0, 1.0);

  MechanismSpec posted;
  posted.family = PostedPriceBurn{2.0, 0.5, PostedPriceBurn::Route::Miner};

  MirParams mir;
  mir.samples = 800;
  mir.n_list = {1, 2};
  CheckReport serial = check_mir_conditions(posted, exp1, mir, ExecPolicy::serial());
  CheckReport parallel = check_mir_conditions(posted, exp1, mir, ExecPolicy::parallel());
  CHECK(check_report_json(serial).dump() == check_report_json(parallel).dump());

  MechanismSpec pos;
  PositionAuction pa;
  pa.weights.kind = PositionWeights::Kind::Harmonic;
  pa.marginal_burns = {0.6};
  pos.family = pa;
  pos.capacity = Capacity::finite(1.0);
  RevenueEquivalenceReport rs = mc_revenue_equivalence(pos, uni, 4, 20000, 9, ExecPolicy::serial());
  RevenueEquivalenceReport rp =
      mc_revenue_equivalence(pos, uni, 4, 20000, 9, ExecPolicy::parallel());
  CHECK(rs.payment_mean == rp.payment_mean);
  CHECK(rs.virtual_surplus_mean == rp.virtual_surplus_mean);
  CHECK(rs.diff_stderr == rp.diff_stderr);

  MistuningReport ms = posted_price_mistuning(exp1, 2.0, 2.0, 50000, 4, ExecPolicy::serial());
  MistuningReport mp = posted_price_mistuning(exp1, 2.0, 2.0, 50000, 4, ExecPolicy::parallel());
  CHECK(ms.delta_mc == mp.delta_mc);
  CHECK(ms.mc_stderr == mp.mc_stderr);

  OncusParams oncus;
  oncus.samples = 300;
  oncus.n = 2;
  oncus.grid = 16;
  CheckReport os = check_oncus(posted, exp1, oncus, ExecPolicy::serial());
  CheckReport op = check_oncus(posted, exp1, oncus, ExecPolicy::parallel());
  CHECK(check_report_json(os).dump() == check_report_json(op).dump());
}

TEST_CASE("worker count does not change results") {
  Distribution uni = Distribution::uniform(0.0, 1.0);
  MechanismSpec m;
  PositionAuction pa;
  pa.weights.kind = PositionWeights::Kind::Harmonic;
  pa.marginal_burns = {0.4};  // mistuned: violations found in parallel too
  m.family = pa;
  m.capacity = Capacity::finite(1.0);

  GscpParams params;
  params.samples = 500;
  params.n_list = {2};
  MechanismSpec mv = m;
  mv.objective = ObjectiveSpace::Value;
  std::string dump2, dump5;
  {
    CheckReport r = check_gscp(mv, uni, params, ExecPolicy{2});
    dump2 = check_report_json(r).dump();
  }
  {
    CheckReport r = check_gscp(mv, uni, params, ExecPolicy{5});
    dump5 = check_report_json(r).dump();
  }
  CHECK(dump2 == dump5);
}
