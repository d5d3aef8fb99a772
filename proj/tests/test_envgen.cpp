#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rwre/envgen.hpp"
#include "rwre/error.hpp"

using namespace rwre;

TEST_CASE("degenerate two-point law gives constant p") {
  Environment env = realize(TwoPointSites{1.0, 0.6}, 99, -5, 5);
  for (int64_t x = -5; x <= 5; ++x) CHECK(env.p(x) == 0.6);
}

TEST_CASE("windows reproduce on overlap and under extension") {
  const EnvironmentLaw law = TwoPointSites{0.3, 0.7};
  Environment a = realize(law, 17, 0, 10);
  Environment b = realize(law, 17, -10, 10);
  for (int64_t x = 0; x <= 10; ++x) CHECK(a.p(x) == b.p(x));
  std::vector<double> before;
  for (int64_t x = 0; x <= 10; ++x) before.push_back(a.p(x));
  a.ensure(-100000, 50000);
  for (int64_t x = 0; x <= 10; ++x) CHECK(a.p(x) == before[static_cast<size_t>(x)]);
  Environment c(law, 18);
  c.ensure(0, 10);
  int same = 0;
  for (int64_t x = 0; x <= 10; ++x) same += c.p(x) == a.p(x);
  CHECK(same < 11);
}

TEST_CASE("reproducibility across growth orders for every law kind") {
  const std::vector<EnvironmentLaw> laws = {
      TwoPointSites{0.4, 0.2},
      Diode{0.3, 1 / 0.09},
      DiscreteSites{{{0.9, 0.7}, {0.2, 0.3}}},
      BoundedJump{2, 1, {{{0.1, 0.2, 0.0, 0.7}, 0.5}, {{0.3, 0.1, 0.1, 0.5}, 0.5}}},
      BondWeights{{{1, 0.5}, {4, 0.5}}},
      RatesPowerLaw{0.5},
  };
  for (const auto& law : laws) {
    Environment fwd(law, 3), bwd(law, 3);
    fwd.ensure(-20000, 20000);
    for (int64_t x = 20000; x >= -20000; x -= 4096) bwd.ensure(x, x);
    bwd.ensure(-20000, 20000);
    for (int64_t x = -20000; x <= 20000; x += 7) {
      REQUIRE(fwd.atom(x) == bwd.atom(x));
      if (fwd.model() != SiteModel::BoundedJump) REQUIRE(fwd.p(x) == bwd.p(x));
    }
  }
}

TEST_CASE("diode fraction over a million sites") {
  Environment env = realize(Diode{0.3, 1 / 0.09}, 2024, 0, 999999);
  int64_t diodes = 0;
  for (int64_t x = 0; x < 1000000; ++x) diodes += env.p(x) == 1.0;
  // binomial sd = sqrt(0.21e6)/1e6 = 4.6e-4
  CHECK(std::abs(static_cast<double>(diodes) / 1e6 - 0.7) < 0.002);
}

TEST_CASE("atom frequencies match weights within 4 binomial sd") {
  const DiscreteSites law{{{0.9, 0.5}, {0.6, 0.3}, {0.2, 0.2}}};
  Environment env = realize(law, 8, 0, 999999);
  int64_t counts[3] = {};
  for (int64_t x = 0; x < 1000000; ++x) ++counts[env.atom(x)];
  const double w[3] = {0.5, 0.3, 0.2};
  for (int i = 0; i < 3; ++i) {
    const double sd = std::sqrt(1e6 * w[i] * (1 - w[i]));
    CHECK(std::abs(static_cast<double>(counts[i]) - 1e6 * w[i]) < 4 * sd);
  }
}

TEST_CASE("power-law rates follow the inverse-CDF law") {
  Environment env = realize(RatesPowerLaw{0.5}, 4, 0, 199999);
  // P{c <= 1/4} = (1/4)^{1-a} = 1/2 for a = 1/2
  int64_t below = 0;
  for (int64_t x = 0; x < 200000; ++x) below += env.bond(x) <= 0.25;
  CHECK(std::abs(static_cast<double>(below) / 2e5 - 0.5) < 0.005);
}

TEST_CASE("site_rho examples and consistency") {
  Environment half = realize(DiscreteSites{{{0.5, 1.0}}}, 1, 0, 0);
  CHECK(site_rho(half, 0) == 1.0);
  Environment seven = realize(DiscreteSites{{{0.7, 1.0}}}, 1, 0, 0);
  CHECK(site_rho(seven, 0) == doctest::Approx(3.0 / 7.0).epsilon(1e-15));
  Environment diode = realize(Diode{0.0, 2.0}, 1, 0, 0);
  CHECK(site_rho(diode, 0) == 0.0);
  Environment env = realize(TwoPointSites{0.5, 0.3}, 5, -100, 100);
  for (int64_t x = -100; x <= 100; ++x) CHECK(env.p(x) == doctest::Approx(1.0 / (1.0 + env.rho(x))).epsilon(1e-15));
  Environment jump = realize(BoundedJump{1, 1, {{{0.5, 0.0, 0.5}, 1.0}}}, 1, 0, 0);
  CHECK_THROWS_AS(site_rho(jump, 0), DomainError);
}

TEST_CASE("bond laws induce site probabilities") {
  Environment env = realize(BondWeights{{{1, 0.5}, {4, 0.5}}}, 6, -50, 50);
  for (int64_t x = -50; x <= 50; ++x) {
    CHECK(env.p(x) == doctest::Approx(env.bond(x) / (env.bond(x - 1) + env.bond(x))));
    CHECK(env.rho(x) == doctest::Approx(env.bond(x - 1) / env.bond(x)));
  }
}

TEST_CASE("invalid laws are rejected") {
  CHECK_THROWS_AS(check_law(DiscreteSites{{{0.5, 0.6}, {0.4, 0.3}}}), InvalidLaw);
  CHECK_THROWS_AS(check_law(TwoPointSites{1.2, 0.5}), InvalidLaw);
  CHECK_THROWS_AS(check_law(BoundedJump{1, 1, {{{0.5, 0.2, 0.2}, 1.0}}}), InvalidLaw);
  CHECK_THROWS_AS(check_law(BondWeights{{{-1, 1.0}}}), InvalidLaw);
  CHECK_THROWS_AS(Environment(DiscreteSites{{{0.5, 0.5}}}, 1), InvalidLaw);
  CHECK_NOTHROW(check_law(DiscreteSites{{{0.5, 0.5 + 5e-13}, {0.4, 0.5}}}));
}

TEST_CASE("validate reports") {
  const LawReport two = validate(TwoPointSites{0.3, 0.3});
  REQUIRE(two.ellipticity.has_value());
  CHECK(*two.ellipticity == doctest::Approx(0.3));
  CHECK_FALSE(two.degenerate);
  CHECK(two.arithmetic);
  CHECK(*two.lattice_span == doctest::Approx(std::log(7.0 / 3.0)));
  CHECK(two.eta_finite);

  const LawReport diode = validate(Diode{0.3, 1 / 0.09});
  CHECK(diode.ellipticity_violated);
  CHECK(diode.has_diode_atom);
  CHECK_FALSE(diode.eta_finite);
  REQUIRE(diode.ellipticity.has_value());
  CHECK(*diode.ellipticity == doctest::Approx(0.09 / 1.09));

  const LawReport sym = validate(DiscreteSites{{{0.5, 1.0}}});
  CHECK(*sym.ellipticity == 0.5);
  CHECK(sym.degenerate);

  const LawReport irr = validate(DiscreteSites{{{0.9, 0.7}, {0.2, 0.3}}});
  CHECK_FALSE(irr.arithmetic);  // ln 9 / ln 4 is irrational
  const LawReport lat = validate(DiscreteSites{{{0.8, 0.5}, {1.0 / 3.0, 0.5}}});
  CHECK(lat.arithmetic);  // ln rho in {-ln 4, ln 2}
  CHECK(*lat.lattice_span == doctest::Approx(std::log(2.0)));
}
