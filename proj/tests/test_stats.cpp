#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rwre/annealed.hpp"
#include "rwre/error.hpp"
#include "rwre/philox.hpp"
#include "rwre/stats.hpp"

using namespace rwre;

namespace {

std::vector<double> pareto(double index, int n, uint64_t seed) {
  CounterRng rng(seed, Stream::Aux);
  std::vector<double> v(static_cast<size_t>(n));
  for (auto& x : v) x = std::pow(rng.uniform_pos(), -1.0 / index);
  return v;
}

std::vector<double> normals(int n, uint64_t seed, double mu = 0, double sd = 1) {
  CounterRng rng(seed, Stream::Aux);
  std::vector<double> v;
  while (static_cast<int>(v.size()) < n) {
    const double r = std::sqrt(-2 * std::log(rng.uniform_pos()));
    const double th = 2 * std::numbers::pi * rng.uniform();
    v.push_back(mu + sd * r * std::cos(th));
    v.push_back(mu + sd * r * std::sin(th));
  }
  v.resize(static_cast<size_t>(n));
  return v;
}

// sup over every sample point of both one-sided gaps, by direct counting
double brute_ks(const std::vector<double>& s, const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(s.size());
  double d = 0;
  for (double x : s) {
    double le = 0, lt = 0;
    for (double y : s) {
      le += y <= x;
      lt += y < x;
    }
    d = std::max({d, std::abs(le / n - cdf(x)), std::abs(lt / n - cdf(x))});
  }
  return d;
}

}  // namespace

TEST_CASE("type-7 quantiles") {
  std::vector<double> v;
  for (int i = 1; i <= 10; ++i) v.push_back(i);
  CHECK(quantile(v, 0.33) == doctest::Approx(3.97));
  CHECK(quantile(v, 0.5) == doctest::Approx(5.5));
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 10.0);
  v[9] = INFINITY;
  CHECK(quantile(v, 0.5) == doctest::Approx(5.5));
  CHECK(std::isinf(quantile(v, 0.95)));
}

TEST_CASE("least squares") {
  const LineFit f = ols({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.residual == doctest::Approx(0.0).epsilon(1e-12));
  const ScalingFit l = loglog_fit({10, 100, 1000}, {3, 30, 300});
  CHECK(l.slope == doctest::Approx(1.0));
}

TEST_CASE("Hill estimator on Pareto samples") {
  for (double k : {0.5, 0.77, 1.64}) {
    const TailIndex t = tail_index(pareto(k, 100000, 17), 200, 3);
    CHECK(t.k == 316);
    CHECK(t.ci_lo <= k);
    CHECK(t.ci_hi >= k);
    CHECK(std::abs(t.index - k) < 0.1 * k);
    CHECK_FALSE(t.large);
  }
  const TailIndex p = tail_index(pareto(0.77, 100000, 5));
  CHECK(p.index == doctest::Approx(0.77).epsilon(0.065));
}

TEST_CASE("Hill estimator flags light tails") {
  CounterRng rng(3, Stream::Aux);
  std::vector<double> e(100000);
  for (auto& x : e) x = -std::log(rng.uniform_pos());
  CHECK(tail_index(e).large);
  CHECK_THROWS_AS(tail_index(std::vector<double>(100, 1.0)), DomainError);
}

TEST_CASE("KS distance matches brute force") {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    auto s = normals(20 + static_cast<int>(seed) * 8, seed);
    s.push_back(s[3]);  // a tie
    CHECK(std::abs(ks_distance(s, normal_cdf) - brute_ks(s, normal_cdf)) < 1e-12);
  }
}

TEST_CASE("KS tests accept and reject") {
  const auto z = normals(10000, 2);
  CHECK(ks_normal(z, 0, 1).pass);
  CHECK(ks_normal(normals(10000, 3, 5, 2), 5, 4).pass);
  CounterRng rng(4, Stream::Aux);
  std::vector<double> u(10000);
  for (auto& x : u) x = rng.uniform();
  CHECK_FALSE(ks_normal(u, 0.5, 1.0 / 12).pass);
  CHECK_THROWS_AS(ks_normal(std::vector<double>(10, 0.0), 0, 1), DomainError);
  CHECK_THROWS_AS(ks_normal(std::vector<double>(5000, 0.0), 0, 0), DomainError);
  CHECK(ks_two_sample(normals(5000, 8), normals(5000, 9)).pass);
  CHECK_FALSE(ks_two_sample(normals(5000, 8), normals(5000, 9, 0.2)).pass);
  CHECK(ks_pvalue(0.0, 100) == doctest::Approx(1.0));
  CHECK(ks_pvalue(1.0, 100) < 1e-10);
}

TEST_CASE("bootstrap is deterministic") {
  std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<std::vector<double>> rows;
  CounterRng rng(1, Stream::Aux);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> r;
    for (double xi : x) r.push_back(2 * xi + rng.uniform());
    rows.push_back(r);
  }
  auto stat = [&](const std::vector<int64_t>& idx) {
    std::vector<double> y(5, 0.0);
    for (int64_t i : idx)
      for (size_t j = 0; j < 5; ++j) y[j] += rows[static_cast<size_t>(i)][j] / idx.size();
    return y;
  };
  const ScalingFit a = bootstrap_fit(x, 50, stat, 100, 5);
  const ScalingFit b = bootstrap_fit(x, 50, stat, 100, 5);
  CHECK(a.ci_lo == b.ci_lo);
  CHECK(a.ci_hi == b.ci_hi);
  CHECK(a.slope == doctest::Approx(2.0).epsilon(0.02));
  CHECK(a.ci_lo < a.slope);
  CHECK(a.ci_hi > a.slope);
}

TEST_CASE("velocity and hitting fits for a constant law") {
  EnsembleSpec es;
  es.n_env = 1;
  es.n_walks = 400;
  es.walk.steps = 100000;
  es.walk.checkpoints = geometric_checkpoints(100000);
  es.walk.levels = {100, 300, 1000, 3000, 10000};
  es.base_seed = 3;
  const EnsembleResult r = run_ensemble(DiscreteSites{{{0.6, 1.0}}}, es);
  const ScalingFit v = velocity_fit(r, 1000);
  CHECK(v.slope == doctest::Approx(0.2).epsilon(0.01));
  CHECK(v.ci_lo <= v.slope);
  const ScalingFit h = hitting_scaling(r);
  CHECK(h.slope == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("limit-law rescaling") {
  CHECK_THROWS_AS(sinai_rescale(TwoPointSites{0.5, 0.5}, {1.0}, 100), DomainError);
  CHECK_THROWS_AS(sinai_rescale(TwoPointSites{0.3, 0.3}, {1.0}, 100), DomainError);
  const double s2 = std::pow(std::log(7.0 / 3.0), 2);
  const SinaiRescaled r = sinai_rescale(TwoPointSites{0.5, 0.3}, {0.0, 10.0}, 1000);
  CHECK(r.samples[1] == doctest::Approx(s2 * 10 / std::pow(std::log(1000.0), 2)));
  CHECK(s2 == doctest::Approx(0.71794).epsilon(1e-4));
  std::vector<double> n, m;
  for (double k : {1e4, 1e5, 1e6, 1e7}) {
    n.push_back(k);
    m.push_back(3 * std::pow(std::log(k), 2));
  }
  CHECK(sinai_scale_fit(n, m).slope == doctest::Approx(2.0));
}

TEST_CASE("oscillation minima on a synthetic curve") {
  const double period = 2.408;
  std::vector<double> n, y;
  for (int64_t c : geometric_checkpoints(100000000)) {
    const double ln = std::log(double(c));
    n.push_back(double(c));
    y.push_back(std::pow(double(c), 0.5) * (1 + 0.1 * std::cos(2 * std::numbers::pi * ln / period)));
  }
  const Oscillation o = oscillation_minima(n, y, 0.5, period);
  CHECK(o.minima.size() >= 3);
  CHECK(std::abs(o.spacing - period) < 0.02);
  std::vector<double> flat(n.size());
  for (size_t i = 0; i < n.size(); ++i) flat[i] = std::sqrt(n[i]);
  CHECK_THROWS_AS(oscillation_minima(n, flat, 0.5, period), DomainError);
}
