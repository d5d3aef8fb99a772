#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cli/preset_fns.hpp"
#include "rwre/annealed.hpp"
#include "rwre/error.hpp"
#include "rwre/parallel.hpp"
#include "rwre/quenched.hpp"
#include "rwre/stats.hpp"

namespace rwre::cli {
namespace {

const DiscreteSites kZeroSpeed{{{0.9, 0.7}, {0.2, 0.3}}};  // kappa ~ 0.77
const DiscreteSites kSignFlip{{{0.95, 0.6}, {0.01, 0.4}}};
const DiscreteSites kLight{{{0.8, 0.9}, {0.4, 0.1}}};     // kappa ~ 5.7

Table checkpoint_table(const std::string& name, const EnsembleResult& e) {
  Table t(name, {{"step", ColumnType::Integer}, {"count", ColumnType::Integer}, {"mean", ColumnType::Real},
                 {"var", ColumnType::Real}, {"q05", ColumnType::Real}, {"q25", ColumnType::Real},
                 {"q50", ColumnType::Real}, {"q75", ColumnType::Real}, {"q95", ColumnType::Real},
                 {"frac_neg", ColumnType::Real}, {"frac_zero", ColumnType::Real}, {"frac_pos", ColumnType::Real},
                 {"mean_max_abs", ColumnType::Real}, {"mean_returns", ColumnType::Real}});
  for (const auto& s : e.stats)
    t.add({s.step, s.count, s.mean, s.var, s.q05, s.q25, s.q50, s.q75, s.q95, s.frac_neg, s.frac_zero, s.frac_pos,
           s.mean_max_abs, s.mean_returns});
  return t;
}

Table level_table(const std::string& name, const EnsembleResult& e) {
  Table t(name, {{"level", ColumnType::Integer}, {"hits", ColumnType::Integer}, {"count", ColumnType::Integer},
                 {"q25", ColumnType::Real}, {"median", ColumnType::Real}, {"q75", ColumnType::Real}});
  for (const auto& s : e.level_stats) t.add({s.level, s.hits, s.count, s.q25, s.median, s.q75});
  return t;
}

}  // namespace

ScenarioResult phase_diagram(Params& P) {
  const int64_t grid = P.integer("grid", 41);
  const int64_t n_env = P.integer("n_env", 200);
  const int64_t steps = P.integer("steps", 100000);
  if (grid < 3) throw ConfigError("params.grid: must be >= 3");
  if (P.done()) return {};

  ScenarioResult r;
  Table t("phase_grid", {{"alpha", ColumnType::Real}, {"beta", ColumnType::Real}, {"boundary", ColumnType::Boolean},
                         {"eta", ColumnType::Real}, {"class", ColumnType::Text}, {"frac_pos", ColumnType::Real},
                         {"frac_neg", ColumnType::Real}, {"simulated", ColumnType::Text}, {"match", ColumnType::Boolean}});
  Plot plot{"phase_plot", "simulated drift sign on the (alpha, beta) grid", "alpha", "beta", false, false, {}};
  Series plus{"X_n > 0 majority", {}, {}, true}, minus{"X_n < 0 majority", {}, {}, true},
      wrong{"disagrees with eta", {}, {}, true};
  int64_t points = 0, mismatches = 0, narrow = 0;
  for (int64_t i = 0; i < grid; ++i) {
    for (int64_t j = 0; j < grid; ++j) {
      const double a = static_cast<double>(i) / static_cast<double>(grid - 1);
      const double b = static_cast<double>(j) / static_cast<double>(grid - 1);
      const bool boundary = i == 0 || j == 0 || i == grid - 1 || j == grid - 1 || 2 * i == grid - 1 ||
                            2 * j == grid - 1;
      if (boundary) {
        t.add({a, b, true, std::nan(""), std::string("boundary"), std::nan(""), std::nan(""), std::string(""), true});
        continue;
      }
      const TwoPointSites law{a, b};
      const TransienceClass cls = classify(law);
      const EnsembleResult e = run_ensemble(
          law, ensemble_spec(n_env, 1, steps, {steps}, sub_seed(P.seed(), static_cast<uint64_t>(i * grid + j)),
                             P.threads(), false));
      const CheckpointStats& s = e.stats.back();
      // most frequent value of sign(X_n)
      const std::string sim = s.frac_pos > s.frac_neg && s.frac_pos > s.frac_zero   ? "TransientPlus"
                              : s.frac_neg > s.frac_pos && s.frac_neg > s.frac_zero ? "TransientMinus"
                                                                                    : "tie";
      const bool match = sim == to_string(cls.kind);
      const double d = s.frac_pos - s.frac_neg;
      const double se = std::sqrt(std::max(0.0, s.frac_pos + s.frac_neg - d * d) / static_cast<double>(n_env));
      ++points;
      mismatches += !match;
      narrow += std::abs(d) < 2 * se;
      t.add({a, b, false, cls.eta, std::string(to_string(cls.kind)), s.frac_pos, s.frac_neg, sim, match});
      Series& dst = !match ? wrong : sim == "TransientPlus" ? plus : minus;
      dst.x.push_back(a);
      dst.y.push_back(b);
    }
  }
  plot.series = {plus, minus, wrong};
  r.tables.push_back(std::move(t));
  r.plots.push_back(std::move(plot));
  r.metrics["interior_points"] = points;
  r.metrics["mismatches"] = mismatches;
  r.metrics["unresolved_points"] = narrow;
  r.check("classification matches simulated majority sign", mismatches == 0, static_cast<double>(mismatches),
          "0 mismatches", std::to_string(points) + " interior points, " + std::to_string(narrow) +
                              " with |frac_pos - frac_neg| < 2 se");
  return r;
}

ScenarioResult velocity_preset(Params& P) {
  const auto laws = P.laws("laws", {TwoPointSites{0.8, 0.7}, kLight, DiscreteSites{{{0.7, 0.5}, {0.55, 0.5}}},
                                    DiscreteSites{{{0.9, 0.6}, {0.4, 0.4}}}, DiscreteSites{{{0.6, 0.5}, {0.75, 0.5}}}});
  const double p_const = P.real("constant_p", 0.6);
  const int64_t n_env = P.integer("n_env", 200);
  const int64_t steps = P.integer("steps", 1000000);
  const int64_t min_step = P.integer("fit_min_step", 10000);
  const double rel = P.tol("velocity_rel", 0.02);
  const double rel_const = P.tol("constant_rel", 0.005);
  for (const auto& l : laws)
    if (!(mean_rho(l) < 1)) throw ConfigError("params.laws: every law needs E rho < 1 (" + label(l) + ")");
  if (P.done()) return {};

  ScenarioResult r;
  Table t("velocity", {{"law", ColumnType::Text}, {"mean_rho", ColumnType::Real}, {"v_formula", ColumnType::Real},
                       {"slope", ColumnType::Real}, {"ci_lo", ColumnType::Real}, {"ci_hi", ColumnType::Real},
                       {"rel_err", ColumnType::Real}});
  Plot plot{"velocity_plot", "mean X_n / n", "n", "mean X_n / n", true, false, {}};
  std::vector<EnvironmentLaw> all = laws;
  all.push_back(DiscreteSites{{{p_const, 1.0}}});
  const auto checkpoints = geometric_checkpoints(steps, 8);
  for (size_t k = 0; k < all.size(); ++k) {
    const bool constant = k + 1 == all.size();
    const double v = velocity(all[k]);
    const EnsembleResult e =
        run_ensemble(all[k], ensemble_spec(n_env, 1, steps, checkpoints, sub_seed(P.seed(), k), P.threads()));
    const ScalingFit f = velocity_fit(e, min_step, 200, sub_seed(P.seed(), 100 + k));
    const double err = std::abs(f.slope - v) / v;
    t.add({label(all[k]), mean_rho(all[k]), v, f.slope, f.ci_lo, f.ci_hi, err});
    Series s{label(all[k]), {}, {}, false};
    for (const auto& c : e.stats) {
      s.x.push_back(static_cast<double>(c.step));
      s.y.push_back(c.mean / static_cast<double>(c.step));
    }
    plot.series.push_back(std::move(s));
    if (constant) {
      r.check("constant p slope equals p - q", err <= rel_const, f.slope, pm(2 * p_const - 1, rel_const * v) , "relative");
    } else {
      r.check("slope matches velocity formula: " + label(all[k]), err <= rel, f.slope, pm(v, rel * v), "relative error " + num(err));
    }
  }
  r.tables.push_back(std::move(t));
  r.plots.push_back(std::move(plot));
  return r;
}

ScenarioResult slowdown(Params& P) {
  const EnvironmentLaw zero = P.law("zero_speed_law", kZeroSpeed);
  const int64_t zero_env = P.integer("zero_speed_n_env", 1000);
  const int64_t zero_steps = P.integer("zero_speed_steps", 1000000);
  const EnvironmentLaw flip = P.law("sign_law", kSignFlip);
  const int64_t flip_env = P.integer("sign_n_env", 1000);
  const int64_t flip_steps = P.integer("sign_steps", 100000);
  const double frac = P.tol("sign_fraction", 0.95);
  const double ratio_max = P.tol("zero_speed_ratio", 0.01);
  if (P.done()) return {};

  ScenarioResult r;
  const TransienceClass zc = classify(zero);
  r.check("zero-speed law: v = 0 with eta < 0", velocity(zero) == 0 && zc.kind == Transience::TransientPlus,
          velocity(zero), "v = 0, eta < 0", "eta " + num(zc.eta) + ", E rho " + num(mean_rho(zero)) + ", E 1/rho " + num(mean_inv_rho(zero)));
  const EnsembleResult ez = run_ensemble(
      zero, ensemble_spec(zero_env, 1, zero_steps, geometric_checkpoints(zero_steps, 4), sub_seed(P.seed(), 0), P.threads()));
  const auto xz = ez.positions_at(ez.checkpoints.size() - 1);
  const double n = static_cast<double>(zero_steps);
  const double pos = ez.stats.back().frac_pos;
  int64_t small = 0;
  for (double x : xz) small += std::abs(x) / n <= ratio_max;
  const double mean_ratio = ez.stats.back().mean / n;
  r.check("zero-speed law: X_n > 0 fraction", pos >= frac, pos, ">= " + num(frac), "n = " + num(n));
  r.check("zero-speed law: mean X_n / n", std::abs(mean_ratio) <= ratio_max, mean_ratio, "<= " + num(ratio_max),
          "per-run fraction with |X_n|/n <= " + num(ratio_max) + ": " + num(static_cast<double>(small) / static_cast<double>(xz.size())) +
              ", median X_n/n " + num(quantile(xz, 0.5) / n));
  std::vector<double> cn, cm;
  for (const auto& c : ez.stats) {
    cn.push_back(static_cast<double>(c.step));
    cm.push_back(c.mean);
  }
  const ScalingFit g = loglog_fit(std::vector<double>(cn.end() - 9, cn.end()), std::vector<double>(cm.end() - 9, cm.end()));
  r.metrics["zero_speed_growth_exponent"] = g.slope;
  r.metrics["zero_speed_kappa"] = kappa(zero).kappa;

  const TransienceClass fc = classify(flip);
  r.check("sign law: eta > 0 despite positive mean drift", fc.kind == Transience::TransientMinus && mean_drift(flip) > 0,
          mean_drift(flip), "E(p - q) > 0, eta > 0", "eta " + num(fc.eta));
  const EnsembleResult ef =
      run_ensemble(flip, ensemble_spec(flip_env, 1, flip_steps, geometric_checkpoints(flip_steps, 4), sub_seed(P.seed(), 1), P.threads()));
  r.check("sign law: X_n < 0 fraction", ef.stats.back().frac_neg >= frac, ef.stats.back().frac_neg, ">= " + num(frac),
          "n = " + num(static_cast<double>(flip_steps)));

  r.tables.push_back(checkpoint_table("zero_speed_checkpoints", ez));
  r.tables.push_back(checkpoint_table("sign_law_checkpoints", ef));
  Plot plot{"slowdown_plot", "mean X_n / n", "n", "mean X_n / n", true, true, {}};
  Series a{"zero-speed law", {}, {}, false}, b{"sign law (-mean)", {}, {}, false};
  for (const auto& c : ez.stats) {
    a.x.push_back(static_cast<double>(c.step));
    a.y.push_back(c.mean / static_cast<double>(c.step));
  }
  for (const auto& c : ef.stats) {
    b.x.push_back(static_cast<double>(c.step));
    b.y.push_back(-c.mean / static_cast<double>(c.step));
  }
  plot.series = {a, b};
  r.plots.push_back(std::move(plot));
  return r;
}

ScenarioResult stable_scaling(Params& P) {
  const EnvironmentLaw law = P.law("law", kZeroSpeed);
  const int64_t n_env = P.integer("n_env", 10000);
  const int64_t n_walks = P.integer("n_walks", 1);
  const auto levels = P.integers("levels", {100, 316, 1000, 3162, 10000});
  const int64_t max_steps = P.integer("max_steps", 100000000);
  const int64_t m0_env = P.integer("m0_n_env", 100000);
  const double rel = P.tol("slope_rel", 0.10);
  if (levels.size() < 4) throw ConfigError("params.levels: need >= 4 levels");
  if (P.done()) return {};

  ScenarioResult r;
  const CriticalExponent ck = kappa(law);
  EnsembleSpec es = ensemble_spec(n_env, n_walks, max_steps, {}, sub_seed(P.seed(), 0), P.threads());
  es.walk.levels = levels;
  es.walk.stop_at_last_level = true;
  const EnsembleResult e = run_ensemble(law, es);
  const ScalingFit f = hitting_scaling(e, 200, sub_seed(P.seed(), 1));
  const double target = 1 / ck.kappa;
  r.check("ln median T_n slope equals 1/kappa", std::abs(f.slope - target) <= rel * target, f.slope, pm(target, rel * target),
          "kappa " + num(ck.kappa) + ", pairs " + std::to_string(n_env * n_walks) + ", bootstrap CI [" + num(f.ci_lo) + ", " + num(f.ci_hi) + "]");
  r.tables.push_back(level_table("hitting_levels", e));

  std::vector<double> m0(static_cast<size_t>(m0_env));
  parallel_for(m0_env, P.threads(), [&](int64_t i) {
    Environment env(law, env_seed_for(sub_seed(P.seed(), 2), static_cast<uint64_t>(i)));
    const TruncatedSeries s = progeny_M0(env);
    m0[static_cast<size_t>(i)] = s.infinite ? std::numeric_limits<double>::infinity() : s.value;
  });
  std::vector<double> positive;
  for (double v : m0)
    if (v > 0 && std::isfinite(v)) positive.push_back(v);
  const TailIndex ti = tail_index(positive, 200, sub_seed(P.seed(), 3));
  r.check("M0 tail index CI contains kappa", ti.ci_lo <= ck.kappa && ck.kappa <= ti.ci_hi, ti.index,
          "[" + num(ti.ci_lo) + ", " + num(ti.ci_hi) + "] contains " + num(ck.kappa), "k = " + std::to_string(ti.k));
  r.metrics["kappa"] = ck.kappa;
  r.metrics["hill_index"] = ti.index;

  Plot plot{"hitting_plot", "median hitting time of level n", "n", "median T_n", true, true, {}};
  Series med{"median T_n", {}, {}, true}, fit{"fit", {}, {}, false};
  for (const auto& s : e.level_stats) {
    med.x.push_back(static_cast<double>(s.level));
    med.y.push_back(s.median);
    fit.x.push_back(static_cast<double>(s.level));
    fit.y.push_back(std::exp(f.intercept + f.slope * std::log(static_cast<double>(s.level))));
  }
  plot.series = {med, fit};
  r.plots.push_back(std::move(plot));
  std::sort(positive.begin(), positive.end());
  Plot tail{"m0_tail_plot", "empirical tail of M0", "x", "P{M0 > x}", true, true, {}};
  Series emp{"M0", {}, {}, false};
  const size_t N = positive.size();
  for (size_t k = 1; k <= N; k = k < 100 ? k + 1 : k + k / 50) {
    emp.x.push_back(positive[N - k]);
    emp.y.push_back(static_cast<double>(k) / static_cast<double>(N));
  }
  tail.series = {emp};
  r.plots.push_back(std::move(tail));
  return r;
}

ScenarioResult clt_preset(Params& P) {
  const EnvironmentLaw law = P.law("law", kLight);
  const int64_t n_env = P.integer("n_env", 2000);
  const int64_t steps = P.integer("steps", 1000000);
  const double level = P.tol("ks_level", 0.05);
  if (P.done()) return {};

  ScenarioResult r;
  const double v = velocity(law);
  const EnsembleResult e = run_ensemble(law, ensemble_spec(n_env, 1, steps, {steps}, sub_seed(P.seed(), 0), P.threads()));
  const double n = static_cast<double>(steps);
  std::vector<double> z;
  for (double x : e.positions_at(0)) z.push_back((x - n * v) / std::sqrt(n));
  const double mean = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(z.size());
  double var = 0;
  for (double x : z) var += (x - mean) * (x - mean);
  var /= static_cast<double>(z.size() - 1);
  const KsResult ks = ks_normal(z, 0.0, var, level);
  r.check("(X_n - n v)/sqrt(n) passes KS against the normal law", ks.pass, ks.distance, "p >= " + num(level),
          "p = " + num(ks.p_value) + ", fitted sigma^2 " + num(var) + ", kappa " + num(kappa(law).kappa));
  r.metrics["sigma2"] = var;
  r.metrics["ks_distance"] = ks.distance;
  r.metrics["ks_p"] = ks.p_value;
  std::vector<double> sorted = z;
  std::sort(sorted.begin(), sorted.end());
  Plot plot{"clt_plot", "standardized displacement vs the normal law", "z", "CDF", false, false, {}};
  Series emp{"empirical", {}, {}, false}, ref{"normal", {}, {}, false};
  const double sd = std::sqrt(var);
  for (size_t i = 0; i < sorted.size(); i += std::max<size_t>(1, sorted.size() / 400)) {
    emp.x.push_back(sorted[i] / sd);
    emp.y.push_back((static_cast<double>(i) + 0.5) / static_cast<double>(sorted.size()));
  }
  for (int k = -40; k <= 40; ++k) {
    ref.x.push_back(k / 10.0);
    ref.y.push_back(normal_cdf(k / 10.0));
  }
  plot.series = {emp, ref};
  r.plots.push_back(std::move(plot));
  return r;
}

ScenarioResult sinai_preset(Params& P) {
  const EnvironmentLaw law = P.law("law", TwoPointSites{0.5, 0.3});
  const int64_t n_env = P.integer("n_env", 1000);
  const auto grid = P.integers("n_grid", {10000, 100000, 1000000, 10000000});
  const double slope_tol = P.tol("slope_abs", 0.3);
  const double g_tol = P.tol("density", 1e-8);
  if (grid.size() < 3 || !std::is_sorted(grid.begin(), grid.end())) throw ConfigError("params.n_grid: need >= 3 increasing values");
  if (P.done()) return {};

  ScenarioResult r;
  const EnsembleResult e = run_ensemble(law, ensemble_spec(n_env, 1, grid.back(), grid, sub_seed(P.seed(), 0), P.threads()));
  std::vector<double> ns, mx, ks;
  Table t("sinai_grid", {{"n", ColumnType::Integer}, {"mean_max_abs", ColumnType::Real}, {"ks_distance", ColumnType::Real}});
  for (size_t c = 0; c < e.checkpoints.size(); ++c) {
    ns.push_back(static_cast<double>(e.checkpoints[c]));
    mx.push_back(e.stats[c].mean_max_abs);
    ks.push_back(sinai_rescale(law, e.positions_at(c), e.checkpoints[c]).ks);
    t.add({e.checkpoints[c], mx.back(), ks.back()});
  }
  const ScalingFit f = sinai_scale_fit(ns, mx);
  r.check("ln E max|X| vs ln ln n slope", std::abs(f.slope - 2) <= slope_tol, f.slope, pm(2, slope_tol));
  bool decreasing = true;
  for (size_t i = 1; i < ks.size(); ++i) decreasing = decreasing && ks[i] < ks[i - 1];
  std::string seq;
  for (double d : ks) seq += (seq.empty() ? "" : ", ") + num(d);
  r.check("KS distance to the limit law decreases in n", decreasing, ks.back(), "strictly decreasing", seq);
  const double g0 = sinai_density(0.0);
  r.check("G'(0) = 1/2", std::abs(g0 - 0.5) <= g_tol, g0, pm(0.5, g_tol));
  using boost::math::quadrature::gauss_kronrod;
  const double mass = 2 * (gauss_kronrod<double, 61>::integrate(sinai_density, 0.0, 1.0, 15, 1e-13) +
                           gauss_kronrod<double, 61>::integrate(sinai_density, 1.0, 60.0, 15, 1e-13));
  r.check("integral of G' = 1", std::abs(mass - 1) <= g_tol, mass, pm(1, g_tol));
  r.tables.push_back(std::move(t));

  Plot plot{"sinai_plot", "rescaled positions vs the limit density", "sigma^2 X_n / ln^2 n", "density", false, false, {}};
  const auto samples = sinai_rescale(law, e.positions_at(e.checkpoints.size() - 1), grid.back()).samples;
  Series hist{"simulated n = " + num(static_cast<double>(grid.back())), {}, {}, true}, dens{"G'", {}, {}, false};
  const double w = 0.25;
  for (int b = -16; b < 16; ++b) {
    const double lo = b * w;
    const auto cnt = std::count_if(samples.begin(), samples.end(), [&](double x) { return x >= lo && x < lo + w; });
    hist.x.push_back(lo + w / 2);
    hist.y.push_back(static_cast<double>(cnt) / (w * static_cast<double>(samples.size())));
  }
  for (int k = -400; k <= 400; ++k) {
    dens.x.push_back(k / 100.0);
    dens.y.push_back(sinai_density(k / 100.0));
  }
  plot.series = {hist, dens};
  r.plots.push_back(std::move(plot));
  return r;
}

ScenarioResult figure2(Params& P) {
  const double alpha = P.real("alpha", 0.3);
  const double rho = P.real("rho", 1 / 0.09);
  const int64_t n_env = P.integer("n_env", 10000);
  const int64_t steps = P.integer("steps", 200000);
  const int64_t per_decade = P.integer("per_decade", 16);
  const int64_t fit_min = P.integer("fit_min_step", 1000);
  const int64_t minima_min = P.integer("minima_min_step", 100);
  const double prominence = P.real("min_prominence", 1e-3);
  const double exp_tol = P.tol("exponent_abs", 0.05);
  const double spacing_tol = P.tol("spacing_abs", 0.3);
  const Diode law{alpha, rho};
  try {
    check_law(law);
  } catch (const InvalidLaw& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }
  if (P.done()) return {};

  ScenarioResult r;
  const double k = -std::log(alpha) / std::log(rho);
  const double period = std::log(rho);
  const EnsembleResult e = run_ensemble(
      law, ensemble_spec(n_env, 1, steps, geometric_checkpoints(steps, static_cast<int>(per_decade)), sub_seed(P.seed(), 0), P.threads(), false));
  std::vector<double> ln_n, ln_x, ns, ms;
  for (const auto& s : e.stats) {
    if (s.step >= fit_min && s.mean > 0) {
      ln_n.push_back(std::log(static_cast<double>(s.step)));
      ln_x.push_back(std::log(s.mean));
    }
    if (s.step >= minima_min) {
      ns.push_back(static_cast<double>(s.step));
      ms.push_back(s.mean);
    }
  }
  const LineFit fit = ols(ln_n, ln_x);
  r.check("displacement growth exponent", std::abs(fit.slope - k) <= exp_tol, fit.slope, pm(k, exp_tol),
          "fit over n >= " + std::to_string(fit_min));
  r.metrics["kappa"] = k;
  r.metrics["fitted_exponent"] = fit.slope;
  r.metrics["period"] = period;

  Table mt("minima", {{"index", ColumnType::Integer}, {"ln_n", ColumnType::Real}, {"prominence", ColumnType::Real}});
  Oscillation osc;
  bool found = true;
  std::string why;
  try {
    osc = oscillation_minima(ns, ms, k, period, prominence);
  } catch (const DomainError& ex) {
    found = false;
    why = ex.what();
  }
  if (found) {
    for (size_t i = 0; i < osc.minima.size(); ++i)
      mt.add({static_cast<int64_t>(i), osc.minima[i], osc.prominence[i]});
    std::string at;
    for (double m : osc.minima) at += (at.empty() ? "" : ", ") + num(m);
    r.check("detrended minima spacing", std::abs(osc.spacing - period) <= spacing_tol, osc.spacing, pm(period, spacing_tol),
            "minima at ln n = " + at);
    r.metrics["spacing"] = osc.spacing;
  } else {
    r.check("detrended minima spacing", false, std::nan(""), pm(period, spacing_tol), why);
  }
  Table tk("excursion_atoms", {{"k", ColumnType::Integer}, {"t_k", ColumnType::Real}, {"ln_t_k", ColumnType::Real},
                               {"probability", ColumnType::Real}});
  const auto atoms = diode_excursion_atoms(alpha, rho, 8);
  for (size_t i = 0; i < atoms.size(); ++i)
    tk.add({static_cast<int64_t>(i), atoms[i].first, std::log(atoms[i].first), atoms[i].second});

  Table curve("detrended", {{"step", ColumnType::Integer}, {"mean_x", ColumnType::Real}, {"ln_n", ColumnType::Real},
                            {"detrended", ColumnType::Real}});
  Plot plot{"figure2_plot", "ln(E X_n / n^kappa) for the diode model", "ln n", "ln(E X_n / n^kappa)", false, false, {}};
  Series c{"simulated", {}, {}, false}, mins{"minima", {}, {}, true};
  for (const auto& s : e.stats) {
    if (!(s.mean > 0)) continue;
    const double ln = std::log(static_cast<double>(s.step));
    const double d = std::log(s.mean) - k * ln;
    curve.add({s.step, s.mean, ln, d});
    if (s.step >= minima_min) {
      c.x.push_back(ln);
      c.y.push_back(d);
    }
  }
  for (double m : osc.minima) {
    mins.x.push_back(m);
    mins.y.push_back(c.y.empty() ? 0.0 : *std::min_element(c.y.begin(), c.y.end()));
  }
  plot.series = {c, mins};
  r.tables.push_back(std::move(curve));
  r.tables.push_back(std::move(mt));
  r.tables.push_back(std::move(tk));
  r.plots.push_back(std::move(plot));
  return r;
}

ScenarioResult diode_lln(Params& P) {
  const double alpha = P.real("alpha", 0.3);
  const double rho = P.real("rho", 10.0 / 3.0);
  const int64_t n_env = P.integer("n_env", 10000);
  const int64_t steps = P.integer("steps", 1000000);
  const double tol = P.tol("ratio_rel", 0.10);
  const Diode law{alpha, rho};
  try {
    check_law(law);
  } catch (const InvalidLaw& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }
  if (P.done()) return {};

  ScenarioResult r;
  const EnsembleResult e =
      run_ensemble(law, ensemble_spec(n_env, 1, steps, geometric_checkpoints(steps, 8), sub_seed(P.seed(), 0), P.threads(), false));
  Table t("lln", {{"step", ColumnType::Integer}, {"mean_x", ColumnType::Real}, {"ratio", ColumnType::Real},
                  {"ratio_lnln", ColumnType::Real}});
  Plot plot{"lln_plot", "E X_n 2 ln n / (n ln rho)", "n", "ratio", true, false, {}};
  Series a{"ln n", {}, {}, false}, b{"ln n - ln ln n", {}, {}, false};
  std::vector<double> ns, ms;
  double last = 0, last_refined = 0;
  for (const auto& s : e.stats) {
    const double n = static_cast<double>(s.step);
    ns.push_back(n);
    ms.push_back(s.mean);
    if (s.step < 100) continue;
    last = s.mean * 2 * std::log(n) / (n * std::log(rho));
    last_refined = s.mean * 2 * (std::log(n) - std::log(std::log(n))) / (n * std::log(rho));
    t.add({s.step, s.mean, last, last_refined});
    a.x.push_back(n);
    a.y.push_back(last);
    b.x.push_back(n);
    b.y.push_back(last_refined);
  }
  r.check("E X_n 2 ln n / (n ln rho) at the largest n", std::abs(last - 1) <= tol, last, pm(1, tol),
          "with ln n - ln ln n in place of ln n: " + num(last_refined));
  r.metrics["ratio"] = last;
  r.metrics["ratio_lnln"] = last_refined;
  size_t n_min = 0;
  try {
    n_min = oscillation_minima(ns, ms, -std::log(alpha) / std::log(rho), std::log(rho)).minima.size();
  } catch (const DomainError&) {
  }
  r.check("no periodic minima", n_min < 2, static_cast<double>(n_min), "< 2 minima");
  plot.series = {a, b};
  r.tables.push_back(std::move(t));
  r.plots.push_back(std::move(plot));
  return r;
}

ScenarioResult ensemble_scenario(Params& P) {
  const EnvironmentLaw law = P.law("law", TwoPointSites{0.8, 0.7});
  const int64_t n_env = P.integer("n_env", 100);
  const int64_t n_walks = P.integer("n_walks", 1);
  const int64_t steps = P.integer("steps", 100000);
  const int64_t per_decade = P.integer("per_decade", 8);
  const auto levels = P.integers("levels", {});
  if (site_model(law) != SiteModel::NearestNeighbor && site_model(law) != SiteModel::Bond)
    throw ConfigError("params.law: the ensemble scenario needs a nearest-neighbour site or bond law");
  if (n_env < 1 || n_walks < 1 || steps < 1) throw ConfigError("params: budgets must be positive");
  if (P.done()) return {};

  ScenarioResult r;
  EnsembleSpec es = ensemble_spec(n_env, n_walks, steps, geometric_checkpoints(steps, static_cast<int>(per_decade)), P.seed(), P.threads(), false);
  es.walk.levels = levels;
  const EnsembleResult e = run_ensemble(law, es);
  r.tables.push_back(checkpoint_table("checkpoints", e));
  if (!levels.empty()) r.tables.push_back(level_table("levels", e));
  Plot plot{"mean_plot", "mean displacement", "n", "E X_n", true, false, {}};
  Series s{label(law), {}, {}, false};
  for (const auto& c : e.stats) {
    s.x.push_back(static_cast<double>(c.step));
    s.y.push_back(c.mean);
  }
  plot.series = {s};
  r.plots.push_back(std::move(plot));
  r.metrics["law"] = label(law);
  if (site_model(law) == SiteModel::NearestNeighbor) {
    r.metrics["eta"] = jnum(eta(law));
    r.metrics["velocity"] = jnum(velocity(law));
  }
  return r;
}

}  // namespace rwre::cli
