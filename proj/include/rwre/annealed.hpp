#pragma once
// Closed-form annealed quantities of i.i.d. environments, computed exactly
// from the atoms of the law, plus the environment-indexed series of the
// environment seen from the particle.

#include <cstdint>
#include <utility>
#include <vector>

#include "rwre/envgen.hpp"

namespace rwre {

enum class Transience { TransientPlus, TransientMinus, Recurrent };

const char* to_string(Transience t);

struct TransienceClass {
  Transience kind = Transience::Recurrent;
  double eta = 0;
  bool degenerate = false;  ///< P{rho = 1} = 1
};

/// rho = (1-p)/p per atom; a diode atom has rho = 0, log_rho = -inf.
struct RhoAtom {
  double rho;
  double log_rho;
  double weight;
};

std::vector<RhoAtom> rho_atoms(const EnvironmentLaw& law);

double eta(const EnvironmentLaw& law);
TransienceClass classify(const EnvironmentLaw& law);
double mean_rho(const EnvironmentLaw& law);
double mean_inv_rho(const EnvironmentLaw& law);  ///< +inf with a diode atom
double mean_drift(const EnvironmentLaw& law);    ///< E(p - q)
double log_rho_variance(const EnvironmentLaw& law);
double log_rho_second_moment(const EnvironmentLaw& law);  ///< E ln^2 rho
double velocity(const EnvironmentLaw& law);

/// F(u) = ln E rho^u.
double cgf(const EnvironmentLaw& law, double u);
/// F'(u), the mean of ln rho under the u-tilted law.
double cgf_slope(const EnvironmentLaw& law, double u);

struct CriticalExponent {
  double kappa = 0;
  bool infinite = false;  ///< rho <= 1 a.s. or no root below the search cap
  double lo = 0, hi = 0;
  double f_lo = 0, f_hi = 0;
};

/// Positive root of F. Throws DomainError when eta >= 0 or the law is degenerate.
CriticalExponent kappa(const EnvironmentLaw& law, double u_max = 64.0);

/// I(x) = sup_u (u x - F(u)); +inf outside [min ln rho, max ln rho].
/// Throws DomainError for laws with a diode atom.
double legendre(const EnvironmentLaw& law, double x);

/// min over eps > 0 of I(eps)/eps, with the minimizing eps.
std::pair<double, double> kappa_from_legendre(const EnvironmentLaw& law);

struct Excursion {
  double mean_w = 0;    ///< E w_1, +inf when E rho >= 1
  double mean_tau = 0;  ///< E tau_1, +inf when E rho >= 1
};

Excursion mean_excursion(const EnvironmentLaw& law);

/// (t_k, P{w = t_k}) for k = 0..k_max.
std::vector<std::pair<double, double>> diode_excursion_atoms(double alpha, double rho, int k_max);

struct SeriesValue {
  double value = 0;
  bool converged = false;
  int64_t terms = 0;
};

/// f = v (1 + rho_0) sum_{x>=0} prod_{j=1..x} rho_j for the environment's law.
SeriesValue invariant_density_f(Environment& env, int64_t truncation = 10000, double tol = 1e-12);

/// Delta(x) = v - 1 + 2 v sum_{k>=0} prod_{i=0..k} rho_{x-i}.
SeriesValue harmonic_increment(Environment& env, int64_t x, int64_t truncation = 10000,
                               double tol = 1e-12);

/// h(x) with h(0) = 0 and h(x+1) - h(x) = Delta(x).
double harmonic_h(Environment& env, int64_t x, int64_t truncation = 10000);

/// Limit density G' of the rescaled recurrent walk and its CDF G.
double sinai_density(double x);
double sinai_cdf(double x);

struct Conductivity {
  double mean_c = 0;
  double mean_inv_c = 0;   ///< +inf for power-law rates
  double c_bar = 0;        ///< (E c^{-1})^{-1}
  double c_star = 0;       ///< EMA constant, equal to c_bar
  double delta1 = 0;       ///< E (c_{-1,0} + c_{0,1})^{-1}, exact from atoms when discrete
  double delta1_mc = 0;    ///< pair-sampling estimate
  double delta1_mc_se = 0;
  double delta_star = 0;   ///< E c^{-1} / 2
  double sigma2 = 0;       ///< (E c E c^{-1})^{-1}
  bool subdiffusive = false;
  double msd_exponent = 1;     ///< E X_t^2 ~ t^{msd_exponent}
  double return_exponent = 0.5; ///< p_00(t) ~ t^{-return_exponent}
};

Conductivity conductivity_and_ema(const EnvironmentLaw& law, int64_t mc_pairs = 1000000,
                                  uint64_t seed = 1);

}  // namespace rwre
