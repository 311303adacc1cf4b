// Serial-reference vs OpenMP comparison for the statistical kernels. The two
// paths must produce identical numbers (per-index RNG streams); this binary
// measures the speedup and fails if any result diverges.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "tfm/report.hpp"
#include "tfm/verify.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

template <class F>
double timed(F&& f) {
  auto t0 = Clock::now();
  f();
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Row {
  std::string name;
  double serial_s = 0.0;
  double parallel_s = 0.0;
  bool equal = false;
};

void print_row(const Row& r) {
  std::printf("%-28s %10.3fs %10.3fs %8.2fx   %s\n", r.name.c_str(), r.serial_s, r.parallel_s,
              r.serial_s / (r.parallel_s > 0 ? r.parallel_s : 1e-9),
              r.equal ? "identical" : "DIVERGED");
}

}  // namespace

int run_benchmarks();

int main() {
  try {
    return run_benchmarks();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

int run_benchmarks() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not available; both paths run the serial loop\n");
#endif
  std::printf("%-28s %11s %11s %9s\n", "kernel", "serial", "parallel", "speedup");

  bool all_equal = true;
  const tfm::ExecPolicy serial = tfm::ExecPolicy::serial();
  const tfm::ExecPolicy parallel = tfm::ExecPolicy::parallel();

  {
    tfm::Distribution d = tfm::Distribution::uniform(0.0, 1.0);
    tfm::MechanismSpec m;
    tfm::PositionAuction pa;
    pa.weights.kind = tfm::PositionWeights::Kind::Harmonic;
    pa.weights.scale = 1.0;
    pa.marginal_burns = {0.6};
    m.family = pa;
    m.capacity = tfm::Capacity::finite(1.0);

    tfm::RevenueEquivalenceReport a, b;
    Row row;
    row.name = "mc_revenue (n=5, 2e5)";
    row.serial_s = timed([&] { a = tfm::mc_revenue_equivalence(m, d, 5, 200000, 42, serial); });
    row.parallel_s =
        timed([&] { b = tfm::mc_revenue_equivalence(m, d, 5, 200000, 42, parallel); });
    row.equal = a.payment_mean == b.payment_mean &&
                a.virtual_surplus_mean == b.virtual_surplus_mean && a.z_score == b.z_score;
    all_equal &= row.equal;
    print_row(row);
  }

  {
    tfm::Distribution d = tfm::Distribution::exponential(1.0);
    tfm::MechanismSpec m;
    m.family = tfm::PostedPriceBurn{2.0, 1.0, tfm::PostedPriceBurn::Route::Miner};

    tfm::MirParams params;
    params.samples = 20000;
    params.n_list = {1, 2, 3};
    tfm::CheckReport a, b;
    Row row;
    row.name = "mir_conditions (2e4 x 3n)";
    row.serial_s = timed([&] { a = tfm::check_mir_conditions(m, d, params, serial); });
    row.parallel_s = timed([&] { b = tfm::check_mir_conditions(m, d, params, parallel); });
    row.equal = tfm::check_report_json(a).dump() == tfm::check_report_json(b).dump();
    all_equal &= row.equal;
    print_row(row);
  }

  {
    tfm::Distribution d = tfm::Distribution::exponential(1.0);
    tfm::MistuningReport a, b;
    Row row;
    row.name = "mistuning mc (1e6)";
    row.serial_s =
        timed([&] { a = tfm::posted_price_mistuning(d, 2.0, 2.0, 1000000, 7, serial); });
    row.parallel_s =
        timed([&] { b = tfm::posted_price_mistuning(d, 2.0, 2.0, 1000000, 7, parallel); });
    row.equal = a.delta_mc == b.delta_mc && a.mc_stderr == b.mc_stderr;
    all_equal &= row.equal;
    print_row(row);
  }

  if (!all_equal) {
    std::fprintf(stderr, "FAILURE: serial and parallel kernels disagree\n");
    return 1;
  }
  return 0;
}
