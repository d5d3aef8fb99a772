#pragma once
// Estimators and goodness-of-fit checks applied to ensembles.

#include <cstdint>
#include <functional>
#include <vector>

#include "rwre/envgen.hpp"
#include "rwre/simulate.hpp"

namespace rwre {

/// Type-7 (linear interpolation) sample quantile; +inf entries sort last and
/// propagate when they take part in the interpolation.
double quantile(std::vector<double> v, double q);
double quantile_sorted(const std::vector<double>& sorted, double q);

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double residual = 0;  ///< root-mean-square residual
  double slope_se = 0;
};

LineFit ols(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingFit {
  std::vector<double> x, y;
  double slope = 0;
  double intercept = 0;
  double residual = 0;
  double ci_lo = 0;
  double ci_hi = 0;
};

/// Generic percentile bootstrap over `n_items` resampling units: stat(indices)
/// returns the y series for a resample; the slope of y against x is refit per
/// replicate. Resampling is driven by a Philox stream keyed by `seed`.
ScalingFit bootstrap_fit(const std::vector<double>& x, int64_t n_items,
                         const std::function<std::vector<double>(const std::vector<int64_t>&)>& stat,
                         int n_boot, uint64_t seed, double level = 0.95);

/// Slope of mean X_n against n over checkpoints n >= min_step (>= 4 needed).
ScalingFit velocity_fit(const EnsembleResult& ens, int64_t min_step = 0, int n_boot = 200,
                        uint64_t seed = 7);

/// Slope of ln median T_n against ln n over the ensemble's levels (>= 4).
ScalingFit hitting_scaling(const EnsembleResult& ens, int n_boot = 200, uint64_t seed = 11);

/// Slope of ln y against ln x (plain least squares, no bootstrap).
ScalingFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

struct TailIndex {
  double index = 0;
  double ci_lo = 0;
  double ci_hi = 0;
  int64_t k = 0;
  bool large = false;  ///< index > 5: light tail
};

/// Hill estimator over the top k = floor(sqrt(N)) order statistics with a
/// percentile bootstrap CI. Requires N >= 10^4 positive samples.
TailIndex tail_index(const std::vector<double>& samples, int n_boot = 200, uint64_t seed = 13,
                     double level = 0.95);

struct KsResult {
  double distance = 0;
  double p_value = 0;
  bool pass = false;
};

/// sup |F_n - F| for samples against a continuous CDF.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);
/// Asymptotic Kolmogorov p-value with Stephens' small-sample correction.
double ks_pvalue(double distance, double n_eff);
double normal_cdf(double x);

/// KS test of (samples - mean)/sqrt(variance) against the standard normal.
/// Requires >= 10^3 samples and variance > 0.
KsResult ks_normal(const std::vector<double>& samples, double mean, double variance,
                   double level = 0.05);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double level = 0.01);

struct SinaiRescaled {
  std::vector<double> samples;  ///< sigma^2 X_n / ln^2 n
  double ks = 0;                ///< distance against the limit CDF
};

/// Rescales positions at step n. The law must be recurrent and non-degenerate.
SinaiRescaled sinai_rescale(const EnvironmentLaw& law, const std::vector<double>& x_n, int64_t n);

/// Slope of ln E max|X| against ln ln n.
ScalingFit sinai_scale_fit(const std::vector<double>& n, const std::vector<double>& mean_max_abs);

struct Oscillation {
  std::vector<double> ln_n;
  std::vector<double> detrended;  ///< ln(E X_n / n^kappa)
  std::vector<double> minima;     ///< minima locations on the ln n axis
  std::vector<double> prominence; ///< rise to the lower of the flanking maxima
  double spacing = 0;             ///< mean gap between consecutive minima
};

/// Detrends checkpoint means by n^kappa and locates minima by three-point
/// quadratic interpolation. A minimum counts when the curve rises by at least
/// min_prominence within half a period on both sides; minima closer than half
/// a period are merged. Throws DomainError when fewer than two remain.
Oscillation oscillation_minima(const std::vector<double>& n, const std::vector<double>& mean_x,
                               double kappa, double expected_period, double min_prominence = 1e-3);

}  // namespace rwre
