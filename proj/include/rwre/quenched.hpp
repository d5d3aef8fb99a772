#pragma once
// Exact computations inside one fixed environment.

#include <cstdint>
#include <vector>

#include "rwre/envgen.hpp"

namespace rwre {

/// Hitting profile u_i = P_i{T_0 < T_n}, i = 0..n.
struct RuinProfile {
  int64_t n = 0;
  std::vector<double> u;
  std::vector<double> log_u;  ///< ln u_i (-inf at i = n)
  double escape = 0;          ///< 1 - u_1 = P_1{T_n < T_0}
  double log_escape = 0;
};

/// Throws DomainError for n < 1 or p_x = 0 at an interior site.
RuinProfile ruin_profile(Environment& env, int64_t n);

struct FirstPassage {
  double f10 = 0;        ///< P_1{T_0 < inf} estimate
  double escape = 0;     ///< limit of 1 - u_1 along the doubling sequence
  int64_t window = 0;    ///< last n used
  bool converged = false;
};

FirstPassage first_passage_right(Environment& env, double tol = 1e-12,
                                 int64_t max_window = int64_t{1} << 22);

struct TruncatedSeries {
  double value = 0;
  bool converged = false;  ///< increments fell below tol relative to the value
  bool infinite = false;   ///< partial sums exceeded exp(700)
  int64_t depth = 0;
};

/// E_0 tau_1 unrolled leftward to `depth` levels, innermost mean replaced by
/// 1: 1 + 2 sum_{k<depth} prod_{i=0..k} rho_{-i} + prod_{i=0..depth} rho_{-i}.
/// A lower bound, nondecreasing in depth.
TruncatedSeries quenched_mean_tau(Environment& env, int64_t depth = 10000, double tol = 1e-12);

/// M_0 = sum_{t>=1} prod_{j=0..t-1} rho_j, truncated at `depth` terms.
TruncatedSeries progeny_M0(Environment& env, int64_t depth = 10000, double tol = 1e-12);

/// Potential Y_x = sum_{j=1..x} ln rho_j (Y_0 = 0, Y_x - Y_{x-1} = ln rho_x
/// for every x). Diode sites make Y infinite past them.
struct Potential {
  int64_t a = 0;
  int64_t b = 0;
  std::vector<double> y;  ///< Y_a..Y_b
  bool has_diode = false;
  double at(int64_t x) const { return y.at(static_cast<size_t>(x - a)); }
};

Potential potential(Environment& env, int64_t a, int64_t b);

struct TrapBound {
  double bound = 0;        ///< exp(-L I(eps))
  double rate = 0;         ///< I(eps)
  double kappa_ratio = 0;  ///< min_eps I(eps)/eps
  double kappa_root = 0;   ///< root of F
};

/// Throws DomainError when eps lies outside the slopes attainable by the law
/// (non-degenerate laws), or when eta >= 0.
TrapBound trap_bound(const EnvironmentLaw& law, int64_t L, double eps);

}  // namespace rwre
