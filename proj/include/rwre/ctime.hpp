#pragma once
// Continuous-time walks with symmetric rates: continued fractions for the
// Laplace-transformed return probability and annealed asymptotics.

#include <cstdint>
#include <vector>

#include "rwre/envgen.hpp"

namespace rwre {

struct GPair {
  double s = 0;
  double g_plus = 0;   ///< G^+_0
  double g_minus = 0;  ///< G^-_0
  int64_t depth = 0;
  double residual = 0;  ///< width of the larger bracket
  bool converged = false;
};

struct GBracket {
  double lower = 0;  ///< tail seeded at 0
  double upper = 0;  ///< tail seeded at infinity
};

/// One-sided continued fraction from site x0 in direction dir (+1 or -1),
/// evaluated from depth levels inward with both tail seeds.
GBracket g_bracket(Environment& env, int64_t x0, int dir, double s, int64_t depth);

/// G^{+-}_0 with geometric deepening from `depth` until both brackets are
/// narrower than tol (relative) or max_depth is reached.
GPair g_continued_fraction(Environment& env, double s, int64_t depth = 2048, double tol = 1e-12,
                           int64_t max_depth = int64_t{1} << 22);

/// Laplace transform of p_00: 1 / (s + G^+_0 + G^-_0).
struct LaplaceValue {
  double value = 0;
  GPair g;
};

LaplaceValue laplace_p00(Environment& env, double s, int64_t depth = 2048, double tol = 1e-12);

struct ReturnAsymptote {
  std::vector<double> s;
  std::vector<double> mean_p00;       ///< E p_00^(s) over environments
  std::vector<double> certified;      ///< fraction of environments with a converged bracket
  double slope = 0;                   ///< d ln E p^ / d ln s over the fit window
  double intercept = 0;
  double c_star = 0;                  ///< implied by E p^ ~ (4 c_* s)^{-1/2}
  double return_exponent = 0;         ///< theta in p_00(t) ~ t^{-theta}, equal to 1 + slope
  double fit_lo = 0, fit_hi = 0;      ///< s range of the fit window
  bool subdiffusive = false;
};

/// Monte Carlo over n_env environments drawn from a rate law. The fit uses
/// the lowest decade of s in which >= 99% of brackets converged.
ReturnAsymptote annealed_return_asymptote(const EnvironmentLaw& law, const std::vector<double>& s_grid,
                                          int64_t n_env, uint64_t seed, int64_t depth = 2048,
                                          int threads = 0);

}  // namespace rwre
