#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rwre/ctime.hpp"
#include "rwre/error.hpp"
#include "rwre/simulate.hpp"
#include "rwre/stats.hpp"

using namespace rwre;

namespace {
double quad_g(double c, double s) { return (-s + std::sqrt(s * s + 4 * c * s)) / 2; }
const Rates kTwo{{{1, 0.5}, {4, 0.5}}};
}  // namespace

TEST_CASE("constant rates match the fixed-point quadratic") {
  for (double c : {0.5, 2.0, 7.0}) {
    Environment env(Rates{{{c, 1.0}}}, 1);
    for (double s : {1e-3, 0.1, 1.0, 30.0}) {
      const GPair g = g_continued_fraction(env, s);
      CHECK(g.converged);
      CHECK(std::abs(g.g_plus - quad_g(c, s)) < 1e-10 * std::max(1.0, quad_g(c, s)));
      CHECK(std::abs(g.g_minus - quad_g(c, s)) < 1e-10 * std::max(1.0, quad_g(c, s)));
      const LaplaceValue p = laplace_p00(env, s);
      CHECK(p.value == doctest::Approx(1 / std::sqrt(s * s + 4 * c * s)).epsilon(1e-10));
    }
  }
}

TEST_CASE("single level and large s limits") {
  Environment env(kTwo, 3);
  const double c = env.bond(0);
  for (double s : {0.1, 2.0}) {
    const GBracket b = g_bracket(env, 0, +1, s, 1);
    CHECK(b.lower == doctest::Approx(1 / (1 / c + 1 / s)).epsilon(1e-15));
    CHECK(b.upper == doctest::Approx(c).epsilon(1e-15));
  }
  const GPair g = g_continued_fraction(env, 4e6);
  CHECK(g.g_plus == doctest::Approx(env.bond(0)).epsilon(0.01));
  CHECK(g.g_minus == doctest::Approx(env.bond(-1)).epsilon(0.01));
  const double s = 1e7;
  CHECK(s * laplace_p00(env, s).value == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("tail seeds bracket the converged value at every depth") {
  Environment env(kTwo, 8);
  const double s = 0.01;
  const double g = g_continued_fraction(env, s).g_plus;
  for (int64_t d = 1; d <= 4096; d *= 2) {
    const GBracket b = g_bracket(env, 0, +1, s, d);
    CHECK(b.lower <= g * (1 + 1e-12));
    CHECK(b.upper >= g * (1 - 1e-12));
  }
  CHECK_THROWS_AS(g_bracket(env, 0, +1, 0.0, 4), DomainError);
  Environment sites(TwoPointSites{0.3, 0.3}, 1);
  CHECK_THROWS_AS(g_bracket(sites, 0, +1, 1.0, 4), DomainError);
}

TEST_CASE("G+ at 0 and 1 share a law; G+_1 is independent of c_01") {
  const int n = 3000;
  const double s = 0.05;
  std::vector<double> g0, g1, c01;
  for (int i = 0; i < n; ++i) {
    Environment e(kTwo, env_seed_for(19, static_cast<uint64_t>(i)));
    const GBracket a = g_bracket(e, 0, +1, s, 4096);
    const GBracket b = g_bracket(e, 1, +1, s, 4096);
    g0.push_back(0.5 * (a.lower + a.upper));
    g1.push_back(0.5 * (b.lower + b.upper));
    c01.push_back(e.bond(0));
  }
  // discrete rates make atoms in the law of G; two-sample KS remains valid
  // as a conservative check
  CHECK(ks_two_sample(g0, g1, 0.01).pass);
  double mg = 0, mc = 0;
  for (int i = 0; i < n; ++i) {
    mg += g1[static_cast<size_t>(i)] / n;
    mc += c01[static_cast<size_t>(i)] / n;
  }
  double sgc = 0, sgg = 0, scc = 0;
  for (int i = 0; i < n; ++i) {
    const double a = g1[static_cast<size_t>(i)] - mg, b = c01[static_cast<size_t>(i)] - mc;
    sgc += a * b;
    sgg += a * a;
    scc += b * b;
  }
  const double r = sgc / std::sqrt(sgg * scc);
  CHECK(std::abs(r) < 3 / std::sqrt(double(n)));
}

TEST_CASE("annealed Laplace asymptotics") {
  const std::vector<double> grid = {1e-5, 2e-5, 5e-5, 1e-4, 2e-4, 5e-4, 1e-3};
  const ReturnAsymptote flat = annealed_return_asymptote(Rates{{{2.0, 1.0}}}, grid, 4, 1);
  CHECK(flat.slope == doctest::Approx(-0.5).epsilon(0.01));
  CHECK(flat.c_star == doctest::Approx(2.0).epsilon(0.03));
  const ReturnAsymptote two = annealed_return_asymptote(kTwo, grid, 400, 2);
  CHECK(two.slope == doctest::Approx(-0.5).epsilon(0.02));
  CHECK(two.c_star == doctest::Approx(1.6).epsilon(0.05));
  CHECK_FALSE(two.subdiffusive);
}

TEST_CASE("power-law rates are subdiffusive") {
  const std::vector<double> grid = {1e-7, 2e-7, 5e-7, 1e-6, 2e-6, 5e-6, 1e-5};
  const ReturnAsymptote pl = annealed_return_asymptote(RatesPowerLaw{0.5}, grid, 400, 3);
  CHECK(pl.subdiffusive);
  CHECK(pl.c_star == 0.0);
  CHECK(std::abs(pl.return_exponent - 1.0 / 3.0) < 0.05);
  CHECK(std::abs(pl.slope + 2.0 / 3.0) < 0.05);
}

TEST_CASE("Laplace transform agrees with simulated occupation") {
  const double s = 0.1;
  const ReturnAsymptote cf = annealed_return_asymptote(kTwo, {s, 2 * s}, 4000, 5);
  const CtrwEnsemble sim = run_ctrw_ensemble(kTwo, 4000, 5, {250.0}, 6, 0, {s});
  CHECK(sim.laplace_p00[0] == doctest::Approx(cf.mean_p00[0]).epsilon(0.02));
}
