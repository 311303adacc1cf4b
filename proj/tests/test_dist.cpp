#include <doctest.h>

#include <cmath>

#include "tfm/dist.hpp"
#include "tfm/quadrature.hpp"

using namespace tfm;

namespace {
const double kE = std::exp(1.0);
}

TEST_CASE("virtual values: closed forms") {
  Distribution exp1 = Distribution::exponential(1.0);
  CHECK(exp1.virtual_value(3.0) == doctest::Approx(2.0).epsilon(1e-12));

  Distribution uni = Distribution::uniform(0.0, 1.0);
  CHECK(uni.virtual_value(0.5) == doctest::Approx(0.0).epsilon(1e-12));

  Distribution cp = Distribution::capped_pareto(0.1);
  CHECK(cp.virtual_value(2.05) == doctest::Approx(1.9).epsilon(1e-12));
  CHECK(cp.virtual_value(1.0) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(cp.virtual_value(2.1) == doctest::Approx(2.1).epsilon(1e-12));

  CHECK_THROWS_AS(uni.virtual_value(1.5), DomainError);
  CHECK_THROWS_AS(exp1.virtual_value(-0.1), DomainError);
}

TEST_CASE("inverse virtual values and monopoly reserves") {
  Distribution exp1 = Distribution::exponential(1.0);
  CHECK(exp1.inverse_virtual_value(4.0) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(exp1.monopoly_reserve() == doctest::Approx(1.0).epsilon(1e-12));

  Distribution uni = Distribution::uniform(0.0, 1.0);
  CHECK(uni.inverse_virtual_value(0.6) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(uni.monopoly_reserve() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(uni.inverse_virtual_value(1.5), DomainError);

  Distribution cp = Distribution::capped_pareto(0.1);
  CHECK(cp.inverse_virtual_value(0.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(cp.monopoly_reserve() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(cp.inverse_virtual_value(2.0) == doctest::Approx(2.1).epsilon(1e-12));
  CHECK_THROWS_AS(cp.inverse_virtual_value(2.2), DomainError);
}

TEST_CASE("smoothness reports") {
  SmoothnessReport e = Distribution::exponential(1.0).smoothness_check();
  CHECK(e.continuous_phi);
  CHECK(e.prob_nonpos_vv == doctest::Approx(1.0 - 1.0 / kE).epsilon(1e-9));
  CHECK(e.smooth);

  SmoothnessReport u = Distribution::uniform(0.0, 1.0).smoothness_check();
  CHECK(u.continuous_phi);
  CHECK(u.prob_nonpos_vv == doctest::Approx(0.5).epsilon(1e-12));

  SmoothnessReport c = Distribution::capped_pareto(0.1).smoothness_check();
  CHECK_FALSE(c.continuous_phi);
  CHECK(c.prob_nonpos_vv == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(c.jump_at == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(c.has_atom_at_sup);
  CHECK_FALSE(c.smooth);
}

TEST_CASE("density integrates to 1 minus the atom") {
  const auto& gl = GaussLegendre64::get();
  Distribution cp = Distribution::capped_pareto(0.1);
  auto cp_pdf = [&](double v) { return cp.pdf(v); };
  double mass = gl.integrate(cp_pdf, 0.0, 2.0) + gl.integrate(cp_pdf, 2.0, 2.05) +
                gl.integrate(cp_pdf, 2.05, cp.support_hi() - 1e-13);
  CHECK(mass == doctest::Approx(1.0 - cp.atom_at_sup()).epsilon(1e-9));

  Distribution exp1 = Distribution::exponential(1.0);
  auto e_pdf = [&](double v) { return exp1.pdf(v); };
  double emass = gl.integrate(e_pdf, 0.0, 5.0) + gl.integrate(e_pdf, 5.0, 20.0) +
                 gl.integrate(e_pdf, 20.0, 60.0);
  CHECK(emass == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("piecewise densities carry exact piece formulas") {
  // A single unit piece reproduces the uniform closed forms.
  Distribution pw = Distribution::piecewise_density({{0.0, 1.0, 1.0}});
  Distribution uni = Distribution::uniform(0.0, 1.0);
  for (double v : {0.1, 0.25, 0.5, 0.73, 0.99}) {
    CHECK(pw.virtual_value(v) == doctest::Approx(uni.virtual_value(v)).epsilon(1e-12));
    CHECK(pw.cdf(v) == doctest::Approx(uni.cdf(v)).epsilon(1e-12));
  }
  // Bisection inverse agrees with the uniform closed form.
  for (double phi : {-0.8, -0.2, 0.0, 0.4, 0.9}) {
    CHECK(pw.inverse_virtual_value(phi) ==
          doctest::Approx(uni.inverse_virtual_value(phi)).epsilon(1e-9));
  }

  // Two pieces with increasing density keep phi monotone, but the density
  // step leaves an upward phi jump at the seam.
  Distribution ok = Distribution::piecewise_density({{0.0, 0.5, 0.5}, {0.5, 1.0, 1.5}});
  SmoothnessReport sr = ok.smoothness_check();
  CHECK(sr.prob_nonpos_vv > 0.0);
  CHECK_FALSE(sr.continuous_phi);
  CHECK(sr.jump_at == doctest::Approx(0.5).epsilon(1e-6));

  // A density drop makes phi jump downward: irregular, rejected.
  CHECK_THROWS_AS(Distribution::piecewise_density({{0.0, 0.5, 1.8}, {0.5, 1.0, 0.2}}),
                  ConfigError);
  // Mass must total one; pieces must be contiguous.
  CHECK_THROWS_AS(Distribution::piecewise_density({{0.0, 0.5, 1.0}}), ConfigError);
  CHECK_THROWS_AS(Distribution::piecewise_density({{0.0, 0.4, 1.0}, {0.5, 1.0, 1.2}}),
                  ConfigError);
}

TEST_CASE("inverse-then-forward is tight where phi is continuous and strict") {
  for (const Distribution& d :
       {Distribution::exponential(1.0), Distribution::uniform(0.0, 1.0)}) {
    for (int i = 0; i < 1024; ++i) {
      double v = d.quantile((i + 0.5) / 1024.0);
      double phi = d.virtual_value(v);
      double back = d.inverse_virtual_value(phi);
      CHECK(back <= v + 1e-9);
      CHECK(back == doctest::Approx(v).epsilon(1e-9));
    }
  }
  // Piecewise densities: the inequality side always holds; phi jumps at the
  // piece edges collapse the inverse onto the edge.
  Distribution pw = Distribution::piecewise_density({{0.0, 0.5, 0.5}, {0.5, 1.0, 1.5}});
  for (int i = 0; i < 256; ++i) {
    double v = pw.quantile((i + 0.5) / 256.0);
    CHECK(pw.inverse_virtual_value(pw.virtual_value(v)) <= v + 1e-9);
  }
  // With a jump, the inverse collapses to the jump location.
  Distribution cp = Distribution::capped_pareto(0.1);
  CHECK(cp.inverse_virtual_value(cp.virtual_value(2.05)) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("phi is non-decreasing and dominated by v on the support grid") {
  for (const Distribution& d :
       {Distribution::exponential(1.0), Distribution::uniform(0.0, 1.0),
        Distribution::capped_pareto(0.1),
        Distribution::piecewise_density({{0.0, 0.5, 0.5}, {0.5, 1.0, 1.5}})}) {
    double prev = -1e300;
    for (int i = 0; i < 1024; ++i) {
      double v = d.quantile((1.0 - d.atom_at_sup()) * (i + 0.5) / 1024.0);
      double phi = d.virtual_value(v);
      CHECK(phi <= v + 1e-12);
      CHECK(phi >= prev - 1e-9);
      prev = std::max(prev, phi);
    }
  }
}

TEST_CASE("monopoly reserve properties") {
  for (const Distribution& d :
       {Distribution::exponential(1.0), Distribution::uniform(0.0, 1.0),
        Distribution::capped_pareto(0.1)}) {
    double r = d.monopoly_reserve();
    double above = std::min(r + 1e-9, d.bounded() ? d.support_hi() : r + 1e-9);
    CHECK(d.virtual_value(above) >= -1e-9);
    CHECK(d.cdf(r) == doctest::Approx(d.smoothness_check().prob_nonpos_vv).epsilon(1e-12));
  }
}

TEST_CASE("sampling is reproducible, sorted, and statistically sane") {
  Distribution exp1 = Distribution::exponential(1.0);
  BidProfile a = exp1.sample(1000, 123);
  BidProfile b = exp1.sample(1000, 123);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.at_rank(i) == b.at_rank(i));  // bit-for-bit
    if (i > 0) CHECK(a.at_rank(i - 1) >= a.at_rank(i));
  }
  CHECK(exp1.sample(0, 7).empty());

  BidProfile big = exp1.sample(100000, 99);
  double mean = 0.0;
  for (double v : big) mean += v;
  mean /= static_cast<double>(big.size());
  CHECK(std::abs(mean - 1.0) <= 3.0 / std::sqrt(100000.0));
}

TEST_CASE("conditional sampler stays below the reserve") {
  Distribution exp1 = Distribution::exponential(1.0);
  ConditionalNegVV neg(exp1);
  CHECK(neg.prob_mass() == doctest::Approx(1.0 - 1.0 / kE).epsilon(1e-9));
  BidProfile p = neg.sample(1000, 5);
  for (double v : p) {
    CHECK(v <= 1.0 + 1e-9);  // phi(v) <= 0 iff v <= 1 for exp(1)
    CHECK(exp1.virtual_value(v) <= 1e-12);
  }
}

TEST_CASE("quantile matches the cdf off atoms") {
  for (const Distribution& d :
       {Distribution::exponential(2.0), Distribution::uniform(0.0, 1.0),
        Distribution::capped_pareto(0.1)}) {
    for (int i = 0; i < 200; ++i) {
      double u = (i + 0.5) / 200.0;
      if (u >= 1.0 - d.atom_at_sup()) {
        CHECK(d.quantile(u) == d.support_hi());
      } else {
        CHECK(d.cdf(d.quantile(u)) == doctest::Approx(u).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("construction rejections") {
  CHECK_THROWS_AS(Distribution::exponential(0.0), ConfigError);
  CHECK_THROWS_AS(Distribution::uniform(1.0, 0.5), ConfigError);
  CHECK_THROWS_AS(Distribution::capped_pareto(0.0), ConfigError);
  CHECK_THROWS_AS(Distribution::capped_pareto(2.5), ConfigError);
}
