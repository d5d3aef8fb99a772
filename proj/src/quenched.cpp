#include "rwre/quenched.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rwre/annealed.hpp"
#include "rwre/error.hpp"

namespace rwre {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

void require_site_model(const Environment& env) {
  if (env.model() != SiteModel::NearestNeighbor && env.model() != SiteModel::Bond)
    throw DomainError("requires a nearest-neighbour environment");
}

}  // namespace

RuinProfile ruin_profile(Environment& env, int64_t n) {
  if (n < 1) throw DomainError("ruin_profile: n must be >= 1");
  require_site_model(env);
  env.ensure(0, n);
  std::vector<double> y(static_cast<size_t>(n), 0.0);
  for (int64_t x = 1; x < n; ++x) {
    if (!(env.p(x) > 0.0)) throw DomainError("ruin_profile: p_x = 0 at an interior site");
    y[static_cast<size_t>(x)] = y[static_cast<size_t>(x - 1)] + env.log_rho(x);
  }
  // suffix[i] = ln sum_{x=i}^{n-1} exp(Y_x)
  std::vector<double> suffix(static_cast<size_t>(n + 1), -kInf);
  for (int64_t i = n - 1; i >= 0; --i)
    suffix[static_cast<size_t>(i)] = log_add(suffix[static_cast<size_t>(i + 1)], y[static_cast<size_t>(i)]);
  RuinProfile r;
  r.n = n;
  r.u.resize(static_cast<size_t>(n + 1));
  r.log_u.resize(static_cast<size_t>(n + 1));
  const double total = suffix[0];
  for (int64_t i = 0; i <= n; ++i) {
    const double lu = suffix[static_cast<size_t>(i)] - total;
    r.log_u[static_cast<size_t>(i)] = lu;
    r.u[static_cast<size_t>(i)] = std::exp(lu);
  }
  r.u[0] = 1.0;
  r.log_u[0] = 0.0;
  r.log_escape = -total;
  r.escape = std::exp(-total);
  return r;
}

FirstPassage first_passage_right(Environment& env, double tol, int64_t max_window) {
  if (!(tol > 0)) throw DomainError("first_passage_right: tol must be positive");
  require_site_model(env);
  FirstPassage out;
  double log_total = 0.0;  // x = 0 term
  double y = 0.0;
  int64_t x = 1;
  double prev = kInf;
  for (int64_t n = 2; n <= max_window; n *= 2) {
    env.ensure(0, n);
    for (; x < n; ++x) {
      y += env.log_rho(x);
      log_total = log_add(log_total, y);
    }
    const double escape = std::exp(-log_total);
    out.window = n;
    out.escape = escape;
    if (std::abs(escape - prev) < tol) {
      out.converged = true;
      break;
    }
    prev = escape;
  }
  out.f10 = 1.0 - out.escape;
  return out;
}

TruncatedSeries quenched_mean_tau(Environment& env, int64_t depth, double tol) {
  if (depth < 1) throw DomainError("quenched_mean_tau: depth must be >= 1");
  require_site_model(env);
  TruncatedSeries out;
  // log of 1 + 2 sum_{k<d} P_k, with P_k = prod_{i=0..k} rho_{-i}
  double log_sum = 0.0;
  double log_p = env.log_rho(0);
  for (int64_t k = 0; k < depth; ++k) {
    const double log_next = log_p + env.log_rho(-(k + 1));
    out.depth = k + 1;
    log_sum = log_add(log_sum, std::log(2.0) + log_p);
    if (log_sum > 700.0) {
      out.infinite = true;
      out.value = kInf;
      return out;
    }
    // increment of the depth-(k+1) value over the depth-k value is P_k + P_{k+1}
    const double log_inc = log_add(log_p, log_next);
    const double value_log = log_add(log_sum, log_next);
    if (log_inc - value_log < std::log(tol) || log_next == -kInf) {
      out.converged = true;
      out.value = std::exp(value_log);
      return out;
    }
    log_p = log_next;
    if (k + 1 == depth) out.value = std::exp(value_log);
  }
  return out;
}

TruncatedSeries progeny_M0(Environment& env, int64_t depth, double tol) {
  if (depth < 1) throw DomainError("progeny_M0: depth must be >= 1");
  require_site_model(env);
  TruncatedSeries out;
  double log_sum = -kInf;
  double log_p = 0.0;
  for (int64_t t = 1; t <= depth; ++t) {
    log_p += env.log_rho(t - 1);
    out.depth = t;
    if (log_p == -kInf) {
      out.converged = true;
      break;
    }
    log_sum = log_add(log_sum, log_p);
    if (log_sum > 700.0) {
      out.infinite = true;
      out.value = kInf;
      return out;
    }
    if (log_p - log_sum < std::log(tol) - 10.0) {
      out.converged = true;
      break;
    }
  }
  out.value = std::exp(log_sum);
  return out;
}

Potential potential(Environment& env, int64_t a, int64_t b) {
  if (a > b) throw DomainError("potential: a > b");
  require_site_model(env);
  Potential p;
  p.a = a;
  p.b = b;
  p.y.assign(static_cast<size_t>(b - a + 1), 0.0);
  const int64_t lo = std::min<int64_t>(a, 0), hi = std::max<int64_t>(b, 0);
  env.ensure(lo, hi);
  std::vector<double> full(static_cast<size_t>(hi - lo + 1), 0.0);
  const auto at = [&](int64_t x) -> double& { return full[static_cast<size_t>(x - lo)]; };
  for (int64_t x = 1; x <= hi; ++x) {
    const double l = env.log_rho(x);
    p.has_diode |= l == -kInf;
    at(x) = at(x - 1) + l;
  }
  for (int64_t x = -1; x >= lo; --x) {
    const double l = env.log_rho(x + 1);
    p.has_diode |= l == -kInf;
    at(x) = at(x + 1) - l;
  }
  for (int64_t x = a; x <= b; ++x) p.y[static_cast<size_t>(x - a)] = at(x);
  return p;
}

TrapBound trap_bound(const EnvironmentLaw& law, int64_t L, double eps) {
  if (L < 1) throw DomainError("trap_bound: L must be >= 1");
  if (!(eps > 0)) throw DomainError("trap_bound: eps must be positive");
  const auto atoms = rho_atoms(law);
  TrapBound out;
  bool constant = true;
  for (const auto& a : atoms) constant &= a.log_rho == atoms.front().log_rho;
  if (constant) {
    const double lr = atoms.front().log_rho;
    out.rate = eps == lr ? 0.0 : kInf;
    out.bound = eps == lr ? 1.0 : 0.0;
    out.kappa_ratio = out.kappa_root = kInf;
    return out;
  }
  const TransienceClass c = classify(law);
  if (c.kind != Transience::TransientPlus) throw DomainError("trap_bound: requires eta < 0");
  double lo = kInf, hi = -kInf;
  for (const auto& a : atoms) {
    lo = std::min(lo, a.log_rho);
    hi = std::max(hi, a.log_rho);
  }
  if (eps < lo || eps > hi) throw DomainError("trap_bound: eps outside the attainable slopes");
  out.rate = legendre(law, eps);
  out.bound = std::exp(-static_cast<double>(L) * out.rate);
  out.kappa_ratio = kappa_from_legendre(law).first;
  out.kappa_root = kappa(law).kappa;
  return out;
}

}  // namespace rwre
