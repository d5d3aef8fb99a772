#include "rwre/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rwre/annealed.hpp"
#include "rwre/error.hpp"
#include "rwre/philox.hpp"

namespace rwre {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::pair<double, double> percentile_ci(std::vector<double> v, double level) {
  std::sort(v.begin(), v.end());
  const double a = 0.5 * (1.0 - level);
  return {quantile_sorted(v, a), quantile_sorted(v, 1.0 - a)};
}

std::vector<int64_t> resample(CounterRng& rng, int64_t n) {
  std::vector<int64_t> idx(static_cast<size_t>(n));
  for (auto& i : idx) i = static_cast<int64_t>(rng.below(static_cast<uint64_t>(n)));
  return idx;
}

}  // namespace

double quantile_sorted(const std::vector<double>& v, double q) {
  if (v.empty()) throw DomainError("quantile: empty sample");
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0 || v[lo] == v[hi]) return v[lo];
  if (std::isinf(v[hi]) || std::isinf(v[lo])) return v[hi];
  return v[lo] + frac * (v[hi] - v[lo]);
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, q);
}

LineFit ols(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("ols: need two or more points");
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0)) throw DomainError("ols: degenerate grid");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    rss += r * r;
  }
  f.residual = std::sqrt(rss / n);
  f.slope_se = x.size() > 2 ? std::sqrt(rss / (n - 2) / sxx) : 0.0;
  return f;
}

ScalingFit bootstrap_fit(const std::vector<double>& x, int64_t n_items,
                         const std::function<std::vector<double>(const std::vector<int64_t>&)>& stat,
                         int n_boot, uint64_t seed, double level) {
  std::vector<int64_t> all(static_cast<size_t>(n_items));
  for (int64_t i = 0; i < n_items; ++i) all[static_cast<size_t>(i)] = i;
  ScalingFit fit;
  fit.x = x;
  fit.y = stat(all);
  const LineFit base = ols(fit.x, fit.y);
  fit.slope = base.slope;
  fit.intercept = base.intercept;
  fit.residual = base.residual;
  std::vector<double> slopes;
  for (int b = 0; b < n_boot; ++b) {
    CounterRng rng(seed, Stream::Bootstrap, static_cast<uint32_t>(b));
    const std::vector<double> y = stat(resample(rng, n_items));
    bool finite = true;
    for (double v : y) finite &= std::isfinite(v);
    if (finite) slopes.push_back(ols(x, y).slope);
  }
  if (slopes.empty()) {
    fit.ci_lo = fit.ci_hi = fit.slope;
  } else {
    std::tie(fit.ci_lo, fit.ci_hi) = percentile_ci(slopes, level);
    fit.ci_lo = std::min(fit.ci_lo, fit.slope);
    fit.ci_hi = std::max(fit.ci_hi, fit.slope);
  }
  return fit;
}

ScalingFit velocity_fit(const EnsembleResult& ens, int64_t min_step, int n_boot, uint64_t seed) {
  std::vector<size_t> cps;
  for (size_t c = 0; c < ens.checkpoints.size(); ++c)
    if (ens.checkpoints[c] >= min_step) cps.push_back(c);
  if (cps.size() < 4) throw DomainError("velocity_fit: need at least 4 checkpoints");
  if (ens.records.empty()) throw DomainError("velocity_fit: ensemble has no records");
  std::vector<double> x;
  for (size_t c : cps) x.push_back(static_cast<double>(ens.checkpoints[c]));
  const auto stat = [&](const std::vector<int64_t>& idx) {
    std::vector<double> y(cps.size(), 0.0);
    for (int64_t i : idx) {
      const auto& r = ens.records[static_cast<size_t>(i)];
      for (size_t k = 0; k < cps.size(); ++k) y[k] += static_cast<double>(r.checkpoint_pos[cps[k]]);
    }
    for (double& v : y) v /= static_cast<double>(idx.size());
    return y;
  };
  return bootstrap_fit(x, static_cast<int64_t>(ens.records.size()), stat, n_boot, seed);
}

ScalingFit hitting_scaling(const EnsembleResult& ens, int n_boot, uint64_t seed) {
  const size_t nl = ens.level_stats.size();
  if (nl < 4) throw DomainError("hitting_scaling: need at least 4 levels");
  std::vector<double> x;
  for (const auto& l : ens.level_stats) x.push_back(std::log(static_cast<double>(l.level)));
  std::vector<std::vector<double>> times(nl);
  for (size_t l = 0; l < nl; ++l) times[l] = ens.hit_times(l);
  const auto stat = [&](const std::vector<int64_t>& idx) {
    std::vector<double> y(nl);
    std::vector<double> buf(idx.size());
    for (size_t l = 0; l < nl; ++l) {
      for (size_t k = 0; k < idx.size(); ++k) buf[k] = times[l][static_cast<size_t>(idx[k])];
      y[l] = std::log(quantile(buf, 0.5));
    }
    return y;
  };
  ScalingFit f = bootstrap_fit(x, static_cast<int64_t>(ens.records.size()), stat, n_boot, seed);
  for (double v : f.y)
    if (!std::isfinite(v)) throw DomainError("hitting_scaling: fewer than half the walks reached a level");
  return f;
}

ScalingFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  ScalingFit f;
  for (size_t i = 0; i < x.size(); ++i) {
    f.x.push_back(std::log(x[i]));
    f.y.push_back(std::log(y[i]));
  }
  const LineFit l = ols(f.x, f.y);
  f.slope = l.slope;
  f.intercept = l.intercept;
  f.residual = l.residual;
  f.ci_lo = l.slope - 1.96 * l.slope_se;
  f.ci_hi = l.slope + 1.96 * l.slope_se;
  return f;
}

TailIndex tail_index(const std::vector<double>& samples, int n_boot, uint64_t seed, double level) {
  if (samples.size() < 10000) throw DomainError("tail_index: need at least 10^4 samples");
  for (double v : samples)
    if (!(v > 0)) throw DomainError("tail_index: samples must be positive");
  const auto n = static_cast<int64_t>(samples.size());
  const auto k = static_cast<int64_t>(std::floor(std::sqrt(static_cast<double>(n))));
  const auto hill = [&](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + k, v.end(), std::greater<>());
    const double threshold = v[static_cast<size_t>(k)];
    double s = 0;
    for (int64_t i = 0; i < k; ++i) s += std::log(v[static_cast<size_t>(i)] / threshold);
    return static_cast<double>(k) / s;
  };
  TailIndex out;
  out.k = k;
  out.index = hill(samples);
  std::vector<double> boots;
  std::vector<double> buf(samples.size());
  for (int b = 0; b < n_boot; ++b) {
    CounterRng rng(seed, Stream::Bootstrap, static_cast<uint32_t>(b));
    for (auto& v : buf) v = samples[static_cast<size_t>(rng.below(static_cast<uint64_t>(n)))];
    const double h = hill(buf);
    if (std::isfinite(h)) boots.push_back(h);
  }
  if (boots.empty()) {
    out.ci_lo = out.ci_hi = out.index;
  } else {
    std::tie(out.ci_lo, out.ci_hi) = percentile_ci(boots, level);
  }
  out.large = out.index > 5.0;
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  double d = 0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::max(static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n));
  }
  return d;
}

double ks_pvalue(double distance, double n_eff) {
  const double sq = std::sqrt(n_eff);
  const double lambda = (sq + 0.12 + 0.11 / sq) * distance;
  if (lambda < 0.2) return 1.0;
  double sum = 0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_normal(const std::vector<double>& samples, double mean, double variance, double level) {
  if (samples.size() < 1000) throw DomainError("ks_normal: need at least 10^3 samples");
  if (!(variance > 0)) throw DomainError("ks_normal: zero variance");
  const double sd = std::sqrt(variance);
  KsResult r;
  r.distance = ks_distance(samples, [&](double x) { return normal_cdf((x - mean) / sd); });
  r.p_value = ks_pvalue(r.distance, static_cast<double>(samples.size()));
  r.pass = r.p_value >= level;
  return r;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double level) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.distance = d;
  r.p_value = ks_pvalue(d, na * nb / (na + nb));
  r.pass = r.p_value >= level;
  return r;
}

SinaiRescaled sinai_rescale(const EnvironmentLaw& law, const std::vector<double>& x_n, int64_t n) {
  const TransienceClass c = classify(law);
  if (c.degenerate) throw DomainError("sinai_rescale: degenerate law (rho = 1 a.s.)");
  if (c.kind != Transience::Recurrent) throw DomainError("sinai_rescale: law is not recurrent");
  if (n < 3) throw DomainError("sinai_rescale: n too small");
  const double sigma2 = log_rho_second_moment(law);
  const double l = std::log(static_cast<double>(n));
  SinaiRescaled out;
  out.samples.reserve(x_n.size());
  for (double x : x_n) out.samples.push_back(sigma2 * x / (l * l));
  out.ks = ks_distance(out.samples, sinai_cdf);
  return out;
}

ScalingFit sinai_scale_fit(const std::vector<double>& n, const std::vector<double>& mean_max_abs) {
  std::vector<double> lnn;
  for (double v : n) lnn.push_back(std::log(v));
  return loglog_fit(lnn, mean_max_abs);
}

Oscillation oscillation_minima(const std::vector<double>& n, const std::vector<double>& mean_x,
                               double kappa, double expected_period, double min_prominence) {
  if (n.size() != mean_x.size() || n.size() < 5) throw DomainError("oscillation_minima: need >= 5 points");
  Oscillation out;
  for (size_t i = 0; i < n.size(); ++i) {
    if (!(mean_x[i] > 0)) continue;
    out.ln_n.push_back(std::log(n[i]));
    out.detrended.push_back(std::log(mean_x[i]) - kappa * std::log(n[i]));
  }
  const auto& x = out.ln_n;
  const auto& y = out.detrended;
  struct Cand {
    double at, value, prominence;
  };
  std::vector<Cand> cands;
  const double half = 0.5 * expected_period;
  for (size_t i = 1; i + 1 < y.size(); ++i) {
    if (!(y[i] <= y[i - 1] && y[i] < y[i + 1])) continue;
    double left = y[i], right = y[i];
    for (size_t j = i; j-- > 0 && x[i] - x[j] <= half;) left = std::max(left, y[j]);
    for (size_t j = i + 1; j < y.size() && x[j] - x[i] <= half; ++j) right = std::max(right, y[j]);
    const double prom = std::min(left, right) - y[i];
    if (prom < min_prominence) continue;
    const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
    const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
    const double d0 = (y1 - y0) / (x1 - x0), d1 = (y2 - y1) / (x2 - x1);
    const double a = (d1 - d0) / (x2 - x0);
    double at = x1, value = y1;
    if (a > 0) {
      const double b = d0 - a * (x0 + x1);
      at = std::clamp(-b / (2 * a), x0, x2);
      value = y1 + (at - x1) * (d0 + a * (at - x0));
    }
    cands.push_back({at, value, prom});
  }
  double last_value = 0;
  for (const Cand& c : cands) {
    if (!out.minima.empty() && c.at - out.minima.back() < half) {
      // keep the deeper of two nearby minima
      if (c.value < last_value) {
        out.minima.back() = c.at;
        out.prominence.back() = c.prominence;
        last_value = c.value;
      }
      continue;
    }
    out.minima.push_back(c.at);
    out.prominence.push_back(c.prominence);
    last_value = c.value;
  }
  if (out.minima.size() < 2) throw DomainError("oscillation_minima: fewer than two minima");
  out.spacing = (out.minima.back() - out.minima.front()) / static_cast<double>(out.minima.size() - 1);
  return out;
}

}  // namespace rwre
