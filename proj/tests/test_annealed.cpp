#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rwre/annealed.hpp"
#include "rwre/error.hpp"
#include "rwre/simulate.hpp"

using namespace rwre;

namespace {

const DiscreteSites kSlow{{{0.9, 0.7}, {0.2, 0.3}}};       // v = 0, kappa ~ 0.77
const DiscreteSites kSznitman{{{0.95, 0.6}, {0.01, 0.4}}};

// theta-series form of the limit density, summed to a fixed 400 terms
double density_oracle(double x) {
  const double pi = std::numbers::pi;
  double s = 0;
  for (int k = 0; k < 400; ++k) {
    const double m = 2.0 * k + 1.0;
    s += (k % 2 ? -1.0 : 1.0) / m * std::exp(-m * m * pi * pi * std::abs(x) / 8.0);
  }
  return 2.0 / pi * s;
}

}  // namespace

TEST_CASE("eta and classification") {
  CHECK(eta(TwoPointSites{0.3, 0.3}) == doctest::Approx(-0.4 * std::log(7.0 / 3.0)).epsilon(1e-14));
  CHECK(eta(TwoPointSites{0.3, 0.3}) == doctest::Approx(-0.33893).epsilon(1e-4));
  CHECK(classify(TwoPointSites{0.3, 0.3}).kind == Transience::TransientPlus);
  for (double b : {0.1, 0.3, 0.7, 0.95}) CHECK(classify(TwoPointSites{0.5, b}).kind == Transience::Recurrent);
  CHECK(classify(TwoPointSites{0.5, 0.5}).degenerate);

  const double sz = 0.6 * std::log(0.05 / 0.95) + 0.4 * std::log(0.99 / 0.01);
  CHECK(eta(kSznitman) == doctest::Approx(sz).epsilon(1e-14));
  CHECK(eta(kSznitman) == doctest::Approx(0.0714).epsilon(0.01));
  CHECK(mean_drift(kSznitman) == doctest::Approx(0.148).epsilon(1e-12));
  CHECK(classify(kSznitman).kind == Transience::TransientMinus);

  CHECK(std::isinf(eta(Diode{0.3, 11.0})));
  CHECK(classify(Diode{0.3, 11.0}).kind == Transience::TransientPlus);
}

TEST_CASE("velocity") {
  CHECK(velocity(DiscreteSites{{{0.6, 1.0}}}) == doctest::Approx(0.2).epsilon(1e-14));
  const double er = 0.8 * 3 / 7 + 0.2 * 7 / 3;
  CHECK(mean_rho(TwoPointSites{0.8, 0.7}) == doctest::Approx(er).epsilon(1e-14));
  CHECK(velocity(TwoPointSites{0.8, 0.7}) == doctest::Approx((1 - er) / (1 + er)).epsilon(1e-14));
  CHECK(velocity(TwoPointSites{0.8, 0.7}) == doctest::Approx(0.10527).epsilon(1e-4));
  CHECK(mean_rho(kSlow) == doctest::Approx(0.7 / 9 + 0.3 * 4).epsilon(1e-14));
  CHECK(mean_inv_rho(kSlow) == doctest::Approx(0.7 * 9 + 0.3 / 4).epsilon(1e-14));
  CHECK(velocity(kSlow) == 0.0);
  CHECK(eta(kSlow) < 0);
  CHECK(velocity(DiscreteSites{{{0.4, 1.0}}}) == doctest::Approx(-0.2).epsilon(1e-14));
  CHECK(velocity(Diode{0.3, 2.0}) == doctest::Approx((1 - 0.6) / (1 + 0.6)));
}

TEST_CASE("Jensen chain and velocity bounds") {
  const std::vector<EnvironmentLaw> laws = {TwoPointSites{0.8, 0.7}, TwoPointSites{0.9, 0.6},
                                            DiscreteSites{{{0.7, 0.5}, {0.55, 0.5}}},
                                            DiscreteSites{{{0.8, 0.9}, {0.4, 0.1}}}};
  for (const auto& law : laws) {
    CHECK(eta(law) < std::log(mean_rho(law)));
    CHECK(velocity(law) > 0);
    CHECK(velocity(law) < mean_drift(law));
  }
  CHECK(eta(DiscreteSites{{{0.7, 1.0}}}) == doctest::Approx(std::log(mean_rho(DiscreteSites{{{0.7, 1.0}}}))));
}

TEST_CASE("cumulant function is convex") {
  for (double u = -3; u < 3; u += 0.25) {
    const double a = cgf(kSlow, u), b = cgf(kSlow, u + 0.25), c = cgf(kSlow, u + 0.5);
    CHECK(b <= 0.5 * (a + c) + 1e-15);
  }
  CHECK(cgf(kSlow, 0) == 0.0);
  CHECK(cgf_slope(kSlow, 0) == doctest::Approx(eta(kSlow)).epsilon(1e-12));
}

TEST_CASE("critical exponent") {
  const CriticalExponent k1 = kappa(TwoPointSites{0.8, 0.7});
  CHECK(std::abs(k1.kappa - std::log(4.0) / std::log(7.0 / 3.0)) < 1e-10);
  CHECK(std::abs(cgf(TwoPointSites{0.8, 0.7}, k1.kappa)) < 1e-12);
  const CriticalExponent kd = kappa(Diode{0.3, 1 / 0.09});
  CHECK(std::abs(kd.kappa - std::log(0.3) / std::log(0.09)) < 1e-10);
  CHECK(std::abs(kd.kappa - 0.5) < 5e-5);
  CHECK(cgf(kSlow, 0.7) < 0);
  CHECK(cgf(kSlow, 0.8) > 0);
  const CriticalExponent ks = kappa(kSlow);
  CHECK(ks.kappa > 0.7);
  CHECK(ks.kappa < 0.8);
  CHECK(std::abs(kappa_from_legendre(kSlow).first - ks.kappa) < 1e-8);
  CHECK(std::abs(kappa_from_legendre(TwoPointSites{0.8, 0.7}).first - k1.kappa) < 1e-8);
  const DiscreteSites gauss{{{0.8, 0.9}, {0.4, 0.1}}};
  CHECK(kappa(gauss).kappa == doctest::Approx(5.7).epsilon(0.01));
  CHECK(kappa(DiscreteSites{{{0.7, 0.5}, {0.6, 0.5}}}).infinite);
  CHECK_THROWS_AS(kappa(TwoPointSites{0.5, 0.3}), DomainError);
  CHECK_THROWS_AS(kappa(DiscreteSites{{{0.5, 1.0}}}), DomainError);
}

TEST_CASE("Legendre transform") {
  // two atoms at -a and +a with weights w, 1-w: I(0) = -ln(2 sqrt(w(1-w)))
  const TwoPointSites law{0.8, 0.7};
  CHECK(legendre(law, 0.0) == doctest::Approx(-std::log(2 * std::sqrt(0.8 * 0.2))).epsilon(1e-10));
  double a = 0;
  for (const auto& r : rho_atoms(law)) a = std::max(a, r.log_rho);
  CHECK(legendre(law, a) == doctest::Approx(-std::log(0.2)));
  CHECK(std::isinf(legendre(law, a + 0.01)));
  CHECK_THROWS_AS(legendre(Diode{0.3, 2.0}, 0.1), DomainError);
}

TEST_CASE("excursions") {
  const Excursion e = mean_excursion(DiscreteSites{{{0.6, 1.0}}});
  CHECK(e.mean_w == doctest::Approx(6.0));
  CHECK(e.mean_tau == doctest::Approx(5.0));
  CHECK(std::isinf(mean_excursion(TwoPointSites{0.5, 0.3}).mean_w));
  CHECK(std::isinf(mean_excursion(Diode{0.3, 1 / 0.09}).mean_w));
  const auto atoms = diode_excursion_atoms(0.3, 1 / 0.09, 30);
  CHECK(atoms[0].first == 2.0);
  CHECK(atoms[0].second == doctest::Approx(0.7));
  for (size_t k = 1; k < atoms.size(); ++k) {
    CHECK(atoms[k].first == doctest::Approx(2 + atoms[k - 1].first / 0.09));
    CHECK(atoms[k].second == doctest::Approx(0.7 * std::pow(0.3, double(k))));
  }
  CHECK(std::log(atoms[30].first) - std::log(atoms[29].first) == doctest::Approx(std::log(1 / 0.09)).epsilon(1e-12));
  const auto flat = diode_excursion_atoms(0.5, 1.0, 5);
  for (size_t k = 0; k < flat.size(); ++k) CHECK(flat[k].first == doctest::Approx(2.0 * double(k + 1)));
}

TEST_CASE("invariant density and harmonic coordinate, constant environment") {
  Environment env(DiscreteSites{{{0.7, 1.0}}}, 1);
  CHECK(invariant_density_f(env).value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(harmonic_increment(env, 0).value) < 1e-10);
  CHECK(std::abs(harmonic_h(env, 25)) < 1e-8);
}

TEST_CASE("harmonic recursion and ensemble identities") {
  const TwoPointSites law{0.8, 0.7};
  const double v = velocity(law);
  Environment env(law, 5);
  for (int64_t x = -20; x <= 20; ++x) {
    const double d1 = harmonic_increment(env, x).value;
    const double d0 = harmonic_increment(env, x - 1).value;
    CHECK(std::abs(d1 - env.rho(x) * d0 - (v - 1 + (1 + v) * env.rho(x))) < 1e-9);
  }
  CHECK(harmonic_h(env, 3) == doctest::Approx(harmonic_increment(env, 0).value + harmonic_increment(env, 1).value +
                                              harmonic_increment(env, 2).value));
}

TEST_CASE("ensemble identities of the environment seen from the walk") {
  // finite-variance law; kappa ~ 5.7
  const DiscreteSites law{{{0.8, 0.9}, {0.4, 0.1}}};
  const double v = velocity(law);
  double sf = 0, sdf = 0, sd = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    Environment e(law, env_seed_for(31, static_cast<uint64_t>(i)));
    const double f = invariant_density_f(e).value;
    sf += f;
    sdf += (2 * e.p(0) - 1) * f;
    sd += harmonic_increment(e, 0).value;
  }
  CHECK(sf / n == doctest::Approx(1.0).epsilon(0.03));
  CHECK(sdf / n == doctest::Approx(v).epsilon(0.03));
  CHECK(std::abs(sd / n) < 0.03);
}

TEST_CASE("limit density of the recurrent walk") {
  CHECK(sinai_density(0.0) == doctest::Approx(0.5).epsilon(1e-14));
  for (double x : {0.05, 0.3, 1.0, 2.5, 7.0}) {
    CHECK(sinai_density(x) == sinai_density(-x));
    CHECK(sinai_density(x) == doctest::Approx(density_oracle(x)).epsilon(1e-10));
  }
  for (double x : {1e-4, 1e-3, 0.01}) {
    CHECK(sinai_density(x) <= 0.5);
    CHECK(sinai_density(x) > 0.49);
  }
  using boost::math::quadrature::gauss_kronrod;
  const double inner = gauss_kronrod<double, 61>::integrate(sinai_density, 0.0, 1.0, 15, 1e-13);
  const double outer = gauss_kronrod<double, 61>::integrate(density_oracle, 1.0, 60.0, 15, 1e-13);
  CHECK(std::abs(2 * (inner + outer) - 1.0) < 1e-8);
  CHECK(sinai_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
  for (double x : {0.2, 1.0, 3.0}) {
    const double ref = 0.5 + gauss_kronrod<double, 61>::integrate(sinai_density, 0.0, x, 15, 1e-13);
    CHECK(sinai_cdf(x) == doctest::Approx(ref).epsilon(1e-10));
    CHECK(sinai_cdf(-x) == doctest::Approx(1 - ref).epsilon(1e-10));
  }
  CHECK(sinai_cdf(50.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("conductivity and effective medium constants") {
  const BondWeights law{{{1, 0.5}, {4, 0.5}}};
  const Conductivity c = conductivity_and_ema(law, 200000, 3);
  CHECK(c.mean_c == doctest::Approx(2.5));
  CHECK(c.mean_inv_c == doctest::Approx(0.625));
  CHECK(c.c_bar == doctest::Approx(1.6).epsilon(1e-15));
  CHECK(c.c_star == c.c_bar);
  CHECK(c.sigma2 == doctest::Approx(0.64).epsilon(1e-15));
  CHECK(c.delta_star == doctest::Approx(0.3125));
  CHECK(c.delta1 == doctest::Approx(0.25 * 0.5 + 0.5 * 0.2 + 0.25 * 0.125).epsilon(1e-14));
  CHECK(std::abs(c.delta1_mc - c.delta1) < 4 * c.delta1_mc_se);
  CHECK(c.delta_star > c.delta1);
  CHECK_FALSE(c.subdiffusive);

  const Conductivity p = conductivity_and_ema(RatesPowerLaw{0.5});
  CHECK(p.subdiffusive);
  CHECK(p.c_star == 0.0);
  CHECK(std::isinf(p.mean_inv_c));
  CHECK(p.msd_exponent == doctest::Approx(2.0 / 3.0));
  CHECK(p.return_exponent == doctest::Approx(1.0 / 3.0));
}
