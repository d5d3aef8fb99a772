#include "rwre/annealed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/minima.hpp>

#include "rwre/error.hpp"
#include "rwre/philox.hpp"

namespace rwre {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

bool has_diode(const std::vector<RhoAtom>& atoms) {
  return std::any_of(atoms.begin(), atoms.end(), [](const RhoAtom& a) { return a.rho == 0.0; });
}

double log_sum_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

// Sum of exp(s_k) over a log-space walk s_k = s_{k-1} + ln rho; stops once
// the running term has fallen far below the running total.
SeriesValue log_series(Environment& env, int64_t start, int64_t dir, bool include_empty,
                       int64_t truncation, double tol) {
  SeriesValue out;
  double log_total = include_empty ? 0.0 : -kInf;
  double s = 0.0;
  const double cut = std::log(tol) - 10.0;
  int64_t x = start;
  for (int64_t k = 0; k < truncation; ++k, x += dir) {
    s += env.log_rho(x);
    ++out.terms;
    if (s == -kInf) {
      out.converged = true;
      break;
    }
    log_total = log_sum_exp(log_total, s);
    if (s - log_total < cut) {
      out.converged = true;
      break;
    }
    if (log_total > 700.0) break;
  }
  out.value = std::exp(log_total);
  return out;
}

// G'(x) for |x| < 1 through the Poisson-dual erfc series.
double density_small(double s) {
  if (s == 0.0) return 0.5;
  const double r = 1.0 / std::sqrt(2.0 * s);
  double sum = 0.5;
  for (int j = 0; j < 64; ++j) {
    const double term = std::erfc((2 * j + 1) * r);
    sum += (j % 2 == 0) ? -term : term;
    if (term < 1e-18) break;
  }
  return sum;
}

double density_large(double s) {
  double sum = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double m = 2 * k + 1;
    const double term = std::exp(-m * m * kPi * kPi * s / 8.0) / m;
    sum += (k % 2 == 0) ? term : -term;
    if (term < 1e-18) break;
  }
  return 2.0 / kPi * sum;
}

// Integral of G' over [0, s].
double mass_small(double s) {
  if (s == 0.0) return 0.0;
  double sum = 0.5 * s;
  for (int j = 0; j < 64; ++j) {
    const double b = 2 * j + 1;
    const double term = (s + b * b) * std::erfc(b / std::sqrt(2.0 * s)) -
                        b * std::sqrt(2.0 * s / kPi) * std::exp(-b * b / (2.0 * s));
    sum += (j % 2 == 0) ? -term : term;
    if (std::abs(term) < 1e-18) break;
  }
  return sum;
}

double mass_large(double s) {
  double sum = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double m = 2 * k + 1;
    const double term = std::exp(-m * m * kPi * kPi * s / 8.0) / (m * m * m);
    sum += (k % 2 == 0) ? term : -term;
    if (term < 1e-18) break;
  }
  return 0.5 - 16.0 / (kPi * kPi * kPi) * sum;
}

}  // namespace

const char* to_string(Transience t) {
  switch (t) {
    case Transience::TransientPlus: return "TransientPlus";
    case Transience::TransientMinus: return "TransientMinus";
    case Transience::Recurrent: return "Recurrent";
  }
  return "?";
}

std::vector<RhoAtom> rho_atoms(const EnvironmentLaw& law) {
  std::vector<RhoAtom> out;
  for (const auto& a : site_atoms(law)) {
    if (!(a.p > 0.0)) throw DomainError("atom with p = 0: rho is infinite");
    if (a.p >= 1.0) {
      out.push_back({0.0, -kInf, a.weight});
    } else {
      const double rho = (1.0 - a.p) / a.p;
      out.push_back({rho, std::log1p(-a.p) - std::log(a.p), a.weight});
    }
  }
  return out;
}

double eta(const EnvironmentLaw& law) {
  double s = 0.0;
  for (const auto& a : rho_atoms(law)) {
    if (a.rho == 0.0) return -kInf;
    s += a.weight * a.log_rho;
  }
  return s;
}

TransienceClass classify(const EnvironmentLaw& law) {
  TransienceClass c;
  const auto atoms = rho_atoms(law);
  c.eta = eta(law);
  double scale = 0.0;
  bool all_one = true;
  for (const auto& a : atoms) {
    if (std::isfinite(a.log_rho)) scale += a.weight * std::abs(a.log_rho);
    all_one &= a.rho == 1.0;
  }
  c.degenerate = all_one;
  if (std::abs(c.eta) <= 1e-14 * std::max(1.0, scale)) {
    c.kind = Transience::Recurrent;
    c.eta = 0.0;
  } else {
    c.kind = c.eta < 0 ? Transience::TransientPlus : Transience::TransientMinus;
  }
  return c;
}

double mean_rho(const EnvironmentLaw& law) {
  double s = 0.0;
  for (const auto& a : rho_atoms(law)) s += a.weight * a.rho;
  return s;
}

double mean_inv_rho(const EnvironmentLaw& law) {
  double s = 0.0;
  for (const auto& a : rho_atoms(law)) {
    if (a.rho == 0.0) return kInf;
    s += a.weight / a.rho;
  }
  return s;
}

double mean_drift(const EnvironmentLaw& law) {
  double s = 0.0;
  for (const auto& a : site_atoms(law)) s += a.weight * (2.0 * a.p - 1.0);
  return s;
}

double log_rho_second_moment(const EnvironmentLaw& law) {
  double s = 0.0;
  for (const auto& a : rho_atoms(law)) {
    if (a.rho == 0.0) return kInf;
    s += a.weight * a.log_rho * a.log_rho;
  }
  return s;
}

double log_rho_variance(const EnvironmentLaw& law) {
  const double m = eta(law);
  if (!std::isfinite(m)) return kInf;
  return log_rho_second_moment(law) - m * m;
}

double velocity(const EnvironmentLaw& law) {
  const double er = mean_rho(law);
  if (er < 1.0) return (1.0 - er) / (1.0 + er);
  const double eri = mean_inv_rho(law);
  if (eri < 1.0) return -(1.0 - eri) / (1.0 + eri);
  return 0.0;
}

double cgf(const EnvironmentLaw& law, double u) {
  if (u == 0.0) return 0.0;
  double m = -kInf;
  const auto atoms = rho_atoms(law);
  for (const auto& a : atoms) {
    if (a.rho == 0.0) {
      if (u < 0) return kInf;
      continue;
    }
    m = std::max(m, std::log(a.weight) + u * a.log_rho);
  }
  if (m == -kInf) return -kInf;
  double s = 0.0;
  for (const auto& a : atoms)
    if (a.rho > 0.0) s += std::exp(std::log(a.weight) + u * a.log_rho - m);
  return m + std::log(s);
}

double cgf_slope(const EnvironmentLaw& law, double u) {
  const auto atoms = rho_atoms(law);
  double m = -kInf;
  for (const auto& a : atoms)
    if (a.rho > 0.0) m = std::max(m, std::log(a.weight) + u * a.log_rho);
  double num = 0.0, den = 0.0;
  for (const auto& a : atoms) {
    if (a.rho == 0.0) continue;
    const double w = std::exp(std::log(a.weight) + u * a.log_rho - m);
    num += w * a.log_rho;
    den += w;
  }
  return num / den;
}

CriticalExponent kappa(const EnvironmentLaw& law, double u_max) {
  const TransienceClass c = classify(law);
  if (c.degenerate) throw DomainError("kappa: degenerate law (rho = 1 a.s.)");
  if (c.kind != Transience::TransientPlus) throw DomainError("kappa: undefined unless eta < 0");
  CriticalExponent out;
  bool above_one = false;
  for (const auto& a : rho_atoms(law)) above_one |= a.rho > 1.0;
  if (!above_one) {
    out.kappa = kInf;
    out.infinite = true;
    return out;
  }
  double lo = 0.0, hi = 1.0;
  while (cgf(law, hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > u_max) {
      out.kappa = kInf;
      out.infinite = true;
      out.lo = lo;
      out.f_lo = cgf(law, lo);
      return out;
    }
  }
  out.lo = lo;
  out.hi = hi;
  out.f_lo = cgf(law, lo);
  out.f_hi = cgf(law, hi);
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (cgf(law, mid) < 0.0) lo = mid;
    else hi = mid;
  }
  out.kappa = 0.5 * (lo + hi);
  return out;
}

double legendre(const EnvironmentLaw& law, double x) {
  const auto atoms = rho_atoms(law);
  if (has_diode(atoms)) throw DomainError("legendre: law has a diode atom");
  double lo_v = kInf, hi_v = -kInf, w_lo = 0, w_hi = 0;
  for (const auto& a : atoms) {
    if (a.log_rho < lo_v) { lo_v = a.log_rho; w_lo = 0; }
    if (a.log_rho == lo_v) w_lo += a.weight;
    if (a.log_rho > hi_v) { hi_v = a.log_rho; w_hi = 0; }
    if (a.log_rho == hi_v) w_hi += a.weight;
  }
  if (x < lo_v || x > hi_v) return kInf;
  if (x == hi_v) return -std::log(w_hi);
  if (x == lo_v) return -std::log(w_lo);
  double a = -1.0, b = 1.0;
  while (cgf_slope(law, a) > x) a *= 2.0;
  while (cgf_slope(law, b) < x) b *= 2.0;
  const auto objective = [&](double u) { return cgf(law, u) - u * x; };
  const auto r = boost::math::tools::brent_find_minima(objective, a, b, std::numeric_limits<double>::digits / 2);
  return -r.second;
}

std::pair<double, double> kappa_from_legendre(const EnvironmentLaw& law) {
  const auto atoms = rho_atoms(law);
  double hi_v = -kInf;
  for (const auto& a : atoms) hi_v = std::max(hi_v, a.log_rho);
  if (!(hi_v > 0.0)) return {kInf, 0.0};
  const auto ratio = [&](double e) { return legendre(law, e) / e; };
  const auto r = boost::math::tools::brent_find_minima(ratio, 1e-9 * hi_v, hi_v, std::numeric_limits<double>::digits / 2);
  return {r.second, r.first};
}

Excursion mean_excursion(const EnvironmentLaw& law) {
  const double er = mean_rho(law);
  if (er >= 1.0) return {kInf, kInf};
  return {2.0 / (1.0 - er), (1.0 + er) / (1.0 - er)};
}

std::vector<std::pair<double, double>> diode_excursion_atoms(double alpha, double rho, int k_max) {
  if (k_max < 0) throw DomainError("diode_excursion_atoms: k_max must be >= 0");
  std::vector<std::pair<double, double>> out;
  double t = 2.0, p = 1.0 - alpha;
  for (int k = 0; k <= k_max; ++k) {
    out.emplace_back(t, p);
    t = 2.0 + rho * t;
    p *= alpha;
  }
  return out;
}

SeriesValue invariant_density_f(Environment& env, int64_t truncation, double tol) {
  const EnvironmentLaw& law = env.law();
  if (mean_rho(law) >= 1.0) return {kInf, false, 0};
  const double v = velocity(law);
  SeriesValue s = log_series(env, 1, +1, true, truncation, tol);
  s.value *= v * (1.0 + env.rho(0));
  return s;
}

SeriesValue harmonic_increment(Environment& env, int64_t x, int64_t truncation, double tol) {
  const EnvironmentLaw& law = env.law();
  if (mean_rho(law) >= 1.0) return {kInf, false, 0};
  const double v = velocity(law);
  SeriesValue s = log_series(env, x, -1, false, truncation, tol);
  s.value = v - 1.0 + 2.0 * v * s.value;
  return s;
}

double harmonic_h(Environment& env, int64_t x, int64_t truncation) {
  double h = 0.0;
  if (x > 0)
    for (int64_t k = 0; k < x; ++k) h += harmonic_increment(env, k, truncation).value;
  else
    for (int64_t k = 1; k <= -x; ++k) h -= harmonic_increment(env, -k, truncation).value;
  return h;
}

double sinai_density(double x) {
  const double s = std::abs(x);
  return s < 1.0 ? density_small(s) : density_large(s);
}

double sinai_cdf(double x) {
  const double s = std::abs(x);
  const double m = s < 1.0 ? mass_small(s) : mass_large(s);
  return x < 0 ? 0.5 - m : 0.5 + m;
}

Conductivity conductivity_and_ema(const EnvironmentLaw& law, int64_t mc_pairs, uint64_t seed) {
  Conductivity out;
  CounterRng rng(seed, Stream::Aux);
  if (const auto* pl = std::get_if<RatesPowerLaw>(&law)) {
    const double a = pl->alpha_exponent;
    const double power = 1.0 / (1.0 - a);
    out.mean_c = (1.0 - a) / (2.0 - a);
    out.mean_inv_c = kInf;
    out.c_bar = out.c_star = 0.0;
    out.delta_star = kInf;
    out.sigma2 = 0.0;
    out.subdiffusive = true;
    out.msd_exponent = 2.0 * (1.0 - a) / (2.0 - a);
    out.return_exponent = (1.0 - a) / (2.0 - a);
    double s = 0, ss = 0;
    for (int64_t i = 0; i < mc_pairs; ++i) {
      const double c1 = std::pow(rng.uniform_pos(), power);
      const double c2 = std::pow(rng.uniform_pos(), power);
      const double v = 1.0 / (c1 + c2);
      s += v;
      ss += v * v;
    }
    const auto n = static_cast<double>(mc_pairs);
    out.delta1 = out.delta1_mc = s / n;
    out.delta1_mc_se = std::sqrt(std::max(0.0, ss / n - out.delta1_mc * out.delta1_mc) / n);
    return out;
  }
  const auto atoms = value_atoms(law);
  for (const auto& a : atoms) {
    out.mean_c += a.weight * a.value;
    out.mean_inv_c += a.weight / a.value;
  }
  out.c_bar = out.c_star = 1.0 / out.mean_inv_c;
  out.delta_star = 0.5 * out.mean_inv_c;
  out.sigma2 = 1.0 / (out.mean_c * out.mean_inv_c);
  for (const auto& a : atoms)
    for (const auto& b : atoms) out.delta1 += a.weight * b.weight / (a.value + b.value);
  std::vector<double> cdf;
  double acc = 0;
  for (const auto& a : atoms) cdf.push_back(acc += a.weight);
  cdf.back() = kInf;
  const auto draw = [&] {
    const double u = rng.uniform();
    return atoms[static_cast<size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin())].value;
  };
  double s = 0, ss = 0;
  for (int64_t i = 0; i < mc_pairs; ++i) {
    const double c1 = draw();
    const double v = 1.0 / (c1 + draw());
    s += v;
    ss += v * v;
  }
  const auto n = static_cast<double>(std::max<int64_t>(mc_pairs, 1));
  out.delta1_mc = s / n;
  out.delta1_mc_se = std::sqrt(std::max(0.0, ss / n - out.delta1_mc * out.delta1_mc) / n);
  return out;
}

}  // namespace rwre
