#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "rwre/annealed.hpp"
#include "rwre/error.hpp"
#include "rwre/randmat.hpp"

using namespace rwre;

namespace {

BoundedJump fixed(int L, int R, std::vector<double> probs) { return BoundedJump{L, R, {{std::move(probs), 1.0}}}; }

std::vector<double> abs_eigen_logs(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m);
  std::vector<double> out;
  for (int i = 0; i < m.rows(); ++i) out.push_back(std::log(std::abs(es.eigenvalues()(i))));
  std::sort(out.rbegin(), out.rend());
  return out;
}

}  // namespace

TEST_CASE("transfer matrix entries") {
  const TransferMatrix one = transfer_matrix({0.4, 0.0, 0.6}, 1, 1);
  REQUIRE(one.order() == 1);
  CHECK(one.m(0, 0) == doctest::Approx(2.0 / 3.0));

  const TransferMatrix two = transfer_matrix({0.1, 0.2, 0.0, 0.7}, 2, 1);
  REQUIRE(two.order() == 2);
  CHECK(two.m(0, 0) == doctest::Approx(3.0 / 7.0));
  CHECK(two.m(0, 1) == doctest::Approx(1.0 / 7.0));
  CHECK(two.m(1, 0) == 1.0);
  CHECK(two.m(1, 1) == 0.0);

  // L=1, R=2: top row a(1), b(1)
  const TransferMatrix r2 = transfer_matrix({0.3, 0.1, 0.4, 0.2}, 1, 2);
  REQUIRE(r2.order() == 2);
  CHECK(r2.m(0, 0) == doctest::Approx(-(0.4 + 0.2) / 0.2));
  CHECK(r2.m(0, 1) == doctest::Approx(0.3 / 0.2));
  CHECK(r2.m(1, 0) == 1.0);

  const TransferMatrix big = transfer_matrix({0.1, 0.15, 0.05, 0.2, 0.1, 0.25, 0.15}, 3, 3);
  REQUIRE(big.order() == 5);
  for (int i = 1; i < 5; ++i)
    for (int j = 0; j < 5; ++j) CHECK(big.m(i, j) == (j == i - 1 ? 1.0 : 0.0));
  CHECK(std::log(std::abs(big.m.determinant())) == doctest::Approx(log_abs_det(big)).epsilon(1e-12));
  CHECK(log_abs_det(big) == doctest::Approx(std::log(0.1 / 0.15)));

  CHECK_THROWS_AS(transfer_matrix({0.0, 0.5, 0.5}, 1, 1), DomainError);
  CHECK_THROWS_AS(transfer_matrix({0.5, 0.2, 0.0}, 1, 1), DomainError);
  CHECK_THROWS_AS(transfer_matrix({0.5, 0.2, 0.2}, 1, 1), DomainError);
}

TEST_CASE("scalar case reduces to the mean of ln rho") {
  const BoundedJump law = as_bounded_jump(TwoPointSites{0.3, 0.3});
  const LyapunovEstimate g = top_lyapunov(law, 200000, 5);
  CHECK(std::abs(g.gamma - eta(TwoPointSites{0.3, 0.3})) < 3 * g.se);
  CHECK(g.se > 0);
}

TEST_CASE("non-random matrix gives the log of the top eigenvalue") {
  const BoundedJump law = fixed(2, 1, {0.1, 0.2, 0.0, 0.7});
  const double lam = (3.0 / 7.0 + std::sqrt(9.0 / 49.0 + 4.0 / 7.0)) / 2.0;
  CHECK(std::abs(lam - 0.6488) < 1e-4);
  const LyapunovEstimate g = top_lyapunov(law, 200000, 1);
  CHECK(std::abs(g.gamma - std::log(lam)) < 1e-5);
  const LyapunovSpectrum s = lyapunov_spectrum(law, 2, 200000, 1);
  const auto ref = abs_eigen_logs(transfer_matrix({0.1, 0.2, 0.0, 0.7}, 2, 1).m);
  CHECK(std::abs(s.gamma[0] - ref[0]) < 1e-4);
  CHECK(std::abs(s.gamma[1] - ref[1]) < 1e-4);
}

TEST_CASE("zero-drift non-random law has vanishing exponent") {
  // p(1) = 1 * p(-1) + 2 * p(-2)
  const BoundedJump law = fixed(2, 1, {0.1, 0.3, 0.1, 0.5});
  const LyapunovEstimate g = top_lyapunov(law, 200000, 2);
  CHECK(std::abs(g.gamma) < 3 * g.se + 1e-4);
}

TEST_CASE("renormalization cadence does not change the estimate") {
  const BoundedJump law{2, 2,
                        {{{0.1, 0.2, 0.1, 0.3, 0.3}, 0.5}, {{0.2, 0.2, 0.1, 0.2, 0.3}, 0.3},
                         {{0.05, 0.3, 0.2, 0.3, 0.15}, 0.2}}};
  const LyapunovEstimate a = top_lyapunov(law, 64000, 9, 1);
  const LyapunovEstimate b = top_lyapunov(law, 64000, 9, 16);
  CHECK(std::abs(a.gamma - b.gamma) < 1e-9);
}

TEST_CASE("full spectrum sums to the mean log determinant") {
  const BoundedJump law{2, 2,
                        {{{0.1, 0.2, 0.1, 0.3, 0.3}, 0.5}, {{0.2, 0.2, 0.1, 0.2, 0.3}, 0.3},
                         {{0.05, 0.3, 0.2, 0.3, 0.15}, 0.2}}};
  double exact = 0;
  for (const auto& a : law.atoms) exact += a.weight * std::log(a.probs.front() / a.probs.back());
  const LyapunovSpectrum s = lyapunov_spectrum(law, 3, 100000, 4);
  double sum = 0, se = 0;
  for (size_t i = 0; i < s.gamma.size(); ++i) {
    sum += s.gamma[i];
    se += s.se[i];
  }
  CHECK(std::abs(sum - exact) < 3 * se + 1e-3);
  for (size_t i = 1; i < s.gamma.size(); ++i) CHECK(s.gamma[i] <= s.gamma[i - 1]);
  // gamma_{R-1} > 0 > gamma_{R+1} with R = 2
  CHECK(s.gamma[0] - 3 * s.se[0] > 0);
  CHECK(s.gamma[2] + 3 * s.se[2] < 0);
}

TEST_CASE("single 2x2 exterior square equals the determinant") {
  const TransferMatrix tm = transfer_matrix({0.1, 0.2, 0.0, 0.7}, 2, 1);
  const double wedge = std::abs(tm.m(0, 0) * tm.m(1, 1) - tm.m(0, 1) * tm.m(1, 0));
  CHECK(std::log(wedge) == doctest::Approx(log_abs_det(tm)).epsilon(1e-14));
}

TEST_CASE("bounded classification") {
  const std::vector<EnvironmentLaw> laws = {TwoPointSites{0.3, 0.3}, TwoPointSites{0.8, 0.3},
                                            DiscreteSites{{{0.9, 0.7}, {0.2, 0.3}}},
                                            DiscreteSites{{{0.95, 0.6}, {0.01, 0.4}}}, TwoPointSites{0.6, 0.8}};
  for (const auto& law : laws) {
    const BoundedClassification c = classify_bounded(as_bounded_jump(law), 200000, 3);
    const Transience t = classify(law).kind;
    CHECK(c.kind == (t == Transience::TransientPlus ? BoundedClass::TransientPlus : BoundedClass::TransientMinus));
  }
  CHECK(classify_bounded(fixed(2, 1, {0.1, 0.2, 0.0, 0.7}), 100000, 1).kind == BoundedClass::TransientPlus);
  const BoundedJump sym{2, 2, {{{0.1, 0.3, 0.2, 0.3, 0.1}, 0.5}, {{0.2, 0.2, 0.2, 0.2, 0.2}, 0.5}}};
  CHECK(classify_bounded(sym, 200000, 7).kind == BoundedClass::Indeterminate);
}
