#include "rwre/ctime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "rwre/error.hpp"
#include "rwre/parallel.hpp"
#include "rwre/simulate.hpp"
#include "rwre/stats.hpp"

namespace rwre {

GBracket g_bracket(Environment& env, int64_t x0, int dir, double s, int64_t depth) {
  if (!(s > 0)) throw DomainError("continued fraction: s must be positive");
  if (depth < 1) throw DomainError("continued fraction: depth must be >= 1");
  if (env.model() != SiteModel::Bond) throw DomainError("continued fraction: requires a rate law");
  // Level j (0-based) uses the rate of the bond from x0 + j*dir outward.
  const auto rate = [&](int64_t j) {
    const int64_t x = x0 + j * dir;
    return dir > 0 ? env.bond(x) : env.bond(x - 1);
  };
  if (dir > 0) env.ensure(x0 - 1, x0 + depth + 1);
  else env.ensure(x0 - depth - 2, x0 + 1);
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (int64_t j = depth - 1; j >= 0; --j) {
    const double c = rate(j);
    lo = 1.0 / (1.0 / c + 1.0 / (s + lo));
    hi = 1.0 / (1.0 / c + 1.0 / (s + hi));
  }
  return {lo, hi};
}

GPair g_continued_fraction(Environment& env, double s, int64_t depth, double tol, int64_t max_depth) {
  GPair g;
  g.s = s;
  for (int64_t d = depth;; d *= 2) {
    const GBracket p = g_bracket(env, 0, +1, s, d);
    const GBracket m = g_bracket(env, 0, -1, s, d);
    g.g_plus = 0.5 * (p.lower + p.upper);
    g.g_minus = 0.5 * (m.lower + m.upper);
    g.depth = d;
    g.residual = std::max((p.upper - p.lower) / p.upper, (m.upper - m.lower) / m.upper);
    if (g.residual < tol) {
      g.converged = true;
      break;
    }
    if (d * 2 > max_depth) break;
  }
  return g;
}

LaplaceValue laplace_p00(Environment& env, double s, int64_t depth, double tol) {
  LaplaceValue v;
  v.g = g_continued_fraction(env, s, depth, tol);
  v.value = 1.0 / (s + v.g.g_plus + v.g.g_minus);
  return v;
}

ReturnAsymptote annealed_return_asymptote(const EnvironmentLaw& law, const std::vector<double>& s_grid,
                                          int64_t n_env, uint64_t seed, int64_t depth, int threads) {
  check_law(law);
  if (site_model(law) != SiteModel::Bond) throw DomainError("annealed_return_asymptote: requires a rate law");
  if (s_grid.size() < 2) throw DomainError("annealed_return_asymptote: need at least two s values");
  ReturnAsymptote out;
  out.s = s_grid;
  std::sort(out.s.begin(), out.s.end());
  const size_t m = out.s.size();
  std::vector<double> values(static_cast<size_t>(n_env) * m);
  std::vector<char> ok(values.size());
  auto shared = std::make_shared<const EnvironmentLaw>(law);
  parallel_for(n_env, threads, [&](int64_t e) {
    Environment env(shared, env_seed_for(seed, static_cast<uint64_t>(e)));
    for (size_t i = 0; i < m; ++i) {
      const LaplaceValue v = laplace_p00(env, out.s[i], depth, 1e-10);
      values[static_cast<size_t>(e) * m + i] = v.value;
      ok[static_cast<size_t>(e) * m + i] = v.g.converged;
    }
  });
  out.mean_p00.assign(m, 0.0);
  out.certified.assign(m, 0.0);
  for (int64_t e = 0; e < n_env; ++e)
    for (size_t i = 0; i < m; ++i) {
      out.mean_p00[i] += values[static_cast<size_t>(e) * m + i];
      out.certified[i] += ok[static_cast<size_t>(e) * m + i];
    }
  for (size_t i = 0; i < m; ++i) {
    out.mean_p00[i] /= static_cast<double>(n_env);
    out.certified[i] /= static_cast<double>(n_env);
  }
  size_t first = m;
  for (size_t i = 0; i < m; ++i)
    if (out.certified[i] >= 0.99) {
      first = i;
      break;
    }
  if (first == m) throw DomainError("annealed_return_asymptote: no certified s values");
  std::vector<double> x, y;
  for (size_t i = first; i < m && out.s[i] <= 10.0 * out.s[first] * (1 + 1e-12); ++i) {
    if (out.certified[i] < 0.99) continue;
    x.push_back(std::log(out.s[i]));
    y.push_back(std::log(out.mean_p00[i]));
  }
  if (x.size() < 2) throw DomainError("annealed_return_asymptote: fit window has fewer than two points");
  const LineFit f = ols(x, y);
  out.slope = f.slope;
  out.intercept = f.intercept;
  out.fit_lo = std::exp(x.front());
  out.fit_hi = std::exp(x.back());
  out.return_exponent = 1.0 + f.slope;
  out.subdiffusive = std::holds_alternative<RatesPowerLaw>(law);
  double acc = 0;
  for (size_t i = 0; i < x.size(); ++i) acc += -std::log(4.0) - x[i] - 2.0 * y[i];
  out.c_star = out.subdiffusive ? 0.0 : std::exp(acc / static_cast<double>(x.size()));
  return out;
}

}  // namespace rwre
