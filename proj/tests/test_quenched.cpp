#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "rwre/annealed.hpp"
#include "rwre/error.hpp"
#include "rwre/philox.hpp"
#include "rwre/quenched.hpp"

using namespace rwre;

namespace {

// dense solve of u_i = p_i u_{i+1} + q_i u_{i-1}, u_0 = 1, u_n = 0
Eigen::VectorXd dense_ruin(Environment& env, int64_t n) {
  const int m = static_cast<int>(n) + 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  a(0, 0) = 1;
  rhs(0) = 1;
  a(m - 1, m - 1) = 1;
  for (int i = 1; i < m - 1; ++i) {
    const double p = env.p(i);
    a(i, i) = 1;
    a(i, i + 1) = -p;
    a(i, i - 1) = -(1 - p);
  }
  return a.partialPivLu().solve(rhs);
}

}  // namespace

TEST_CASE("ruin profile matches a dense linear solve") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    Environment env(DiscreteSites{{{0.9, 0.3}, {0.35, 0.5}, {0.6, 0.2}}}, seed);
    const int64_t n = 5 + static_cast<int64_t>(seed % 40);
    const RuinProfile r = ruin_profile(env, n);
    const Eigen::VectorXd ref = dense_ruin(env, n);
    for (int64_t i = 0; i <= n; ++i) CHECK(r.u[static_cast<size_t>(i)] == doctest::Approx(ref(i)).epsilon(1e-10));
    CHECK(r.escape == doctest::Approx(1 - ref(1)).epsilon(1e-10));
  }
}

TEST_CASE("gambler's ruin closed form for constant p") {
  Environment env(DiscreteSites{{{0.6, 1.0}}}, 1);
  const int64_t n = 30;
  const double rho = 0.4 / 0.6;
  const RuinProfile r = ruin_profile(env, n);
  for (int64_t i = 0; i <= n; ++i) {
    const double ref = (std::pow(rho, i) - std::pow(rho, n)) / (1 - std::pow(rho, n));
    CHECK(r.u[static_cast<size_t>(i)] == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("telescoping and harmonic recursion hold on long windows") {
  Environment env(TwoPointSites{0.5, 0.3}, 77);
  const int64_t n = 3000;
  const RuinProfile r = ruin_profile(env, n);
  double logprod = 0;
  for (int64_t x = 0; x < n; ++x) {
    if (x > 0) logprod += env.log_rho(x);
    // u_{x+1} - u_x = (u_1 - 1) prod_{j=1..x} rho_j
    const double diff = r.u[static_cast<size_t>(x + 1)] - r.u[static_cast<size_t>(x)];
    const double pred = -r.escape * std::exp(logprod);
    if (pred != 0 && std::isfinite(pred) && std::abs(pred) > 1e-300) CHECK(diff == doctest::Approx(pred).epsilon(1e-10));
  }
  for (int64_t i = 1; i < n; i += 17) {
    const double p = env.p(i);
    const size_t k = static_cast<size_t>(i);
    const double res = r.u[k] - p * r.u[k + 1] - (1 - p) * r.u[k - 1];
    CHECK(std::abs(res) <= 1e-12 * std::max(1.0, r.u[k]));
  }
}

TEST_CASE("ruin profile agrees with simulated escapes") {
  int failures = 0;
  for (uint64_t seed = 1; seed <= 40; ++seed) {
    Environment env(DiscreteSites{{{0.8, 0.5}, {0.3, 0.5}}}, seed);
    const int64_t n = 2 + static_cast<int64_t>(seed % 7);
    const double esc = ruin_profile(env, n).escape;
    CounterRng rng(seed, Stream::Aux);
    const int walks = 100000;
    int hits = 0;
    for (int w = 0; w < walks; ++w) {
      int64_t x = 1;
      while (x > 0 && x < n) x += rng.uniform() < env.p(x) ? 1 : -1;
      hits += x == n;
    }
    const double sd = std::sqrt(esc * (1 - esc) / walks);
    failures += std::abs(hits / double(walks) - esc) > 4 * sd;
  }
  CHECK(failures == 0);
}

TEST_CASE("ruin profile handles diodes and rejects bad input") {
  Environment env(Diode{0.5, 4.0}, 3);
  const RuinProfile r = ruin_profile(env, 50);
  for (size_t i = 1; i < r.u.size(); ++i) CHECK(r.u[i] <= r.u[i - 1] + 1e-15);
  CHECK_THROWS_AS(ruin_profile(env, 0), DomainError);
  CHECK_THROWS_AS(Environment(DiscreteSites{{{0.0, 0.5}, {0.5, 0.5}}}, 3), InvalidLaw);
}

TEST_CASE("first passage to the left") {
  Environment right(DiscreteSites{{{0.7, 1.0}}}, 1);
  const FirstPassage fp = first_passage_right(right);
  CHECK(fp.converged);
  CHECK(fp.f10 == doctest::Approx(3.0 / 7.0).epsilon(1e-10));
  Environment left(DiscreteSites{{{0.3, 1.0}}}, 1);
  CHECK(first_passage_right(left).f10 == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("quenched mean of tau_1") {
  Environment c(DiscreteSites{{{0.7, 1.0}}}, 1);
  const TruncatedSeries t = quenched_mean_tau(c);
  CHECK(t.converged);
  CHECK(t.value == doctest::Approx(1 / 0.4).epsilon(1e-10));
  Environment half(DiscreteSites{{{0.5, 1.0}}}, 1);
  CHECK_FALSE(quenched_mean_tau(half).converged);
  Environment env(TwoPointSites{0.8, 0.7}, 9);
  double prev = 0;
  for (int64_t d : {1, 2, 5, 10, 100, 1000}) {
    const TruncatedSeries s = quenched_mean_tau(env, d, 0.0);
    CHECK(s.value >= prev);
    prev = s.value;
  }
  // depth 1: 1 + 2 rho_0 + rho_0 rho_{-1}
  CHECK(quenched_mean_tau(env, 1, 0).value == doctest::Approx(1 + 2 * env.rho(0) + env.rho(0) * env.rho(-1)));
}

TEST_CASE("progeny M0") {
  Environment c(DiscreteSites{{{0.7, 1.0}}}, 1);
  const double rho = 3.0 / 7.0;
  const TruncatedSeries m = progeny_M0(c);
  CHECK(m.converged);
  CHECK(m.value == doctest::Approx(rho / (1 - rho)).epsilon(1e-10));
  Environment env(TwoPointSites{0.3, 0.9}, 4);
  CHECK(progeny_M0(env, 1, 0).value == doctest::Approx(env.rho(0)));
  CHECK(progeny_M0(env, 2, 0).value == doctest::Approx(env.rho(0) + env.rho(0) * env.rho(1)));
  double prev = 0;
  for (int64_t d : {1, 3, 10, 300}) {
    const double v = progeny_M0(env, d, 0).value;
    CHECK(v >= prev);
    prev = v;
  }
  Environment blow(DiscreteSites{{{0.2, 1.0}}}, 1);
  CHECK(progeny_M0(blow, 2000).infinite);
}

TEST_CASE("potential increments") {
  Environment env(TwoPointSites{0.4, 0.35}, 12);
  const Potential y = potential(env, -50, 50);
  CHECK(y.at(0) == 0.0);
  for (int64_t x = -49; x <= 50; ++x) CHECK(y.at(x) - y.at(x - 1) == doctest::Approx(env.log_rho(x)));
  Environment d(Diode{0.0, 2.0}, 1);
  CHECK(potential(d, 0, 5).has_diode);
}

TEST_CASE("trap bound") {
  const DiscreteSites law{{{0.9, 0.7}, {0.2, 0.3}}};
  const TrapBound t = trap_bound(law, 10, 0.5);
  CHECK(t.rate > 0);
  CHECK(t.bound == doctest::Approx(std::exp(-10 * t.rate)));
  CHECK(t.kappa_ratio == doctest::Approx(t.kappa_root).epsilon(1e-8));
  CHECK(t.kappa_root == doctest::Approx(0.77).epsilon(0.01));
  // rate vanishes at the typical slope
  CHECK(legendre(law, eta(law)) == doctest::Approx(0.0).epsilon(1e-10));
  const TrapBound flat = trap_bound(DiscreteSites{{{0.7, 1.0}}}, 10, 0.2);
  CHECK(std::isinf(flat.rate));
  CHECK(flat.bound == 0.0);
  CHECK_THROWS_AS(trap_bound(law, 10, 5.0), DomainError);
  CHECK_THROWS_AS(trap_bound(TwoPointSites{0.7, 0.3}, 10, 0.5), DomainError);
}
