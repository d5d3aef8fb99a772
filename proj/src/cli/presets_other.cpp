#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "cli/preset_fns.hpp"
#include "rwre/annealed.hpp"
#include "rwre/ctime.hpp"
#include "rwre/error.hpp"
#include "rwre/parallel.hpp"
#include "rwre/quenched.hpp"
#include "rwre/randmat.hpp"
#include "rwre/stats.hpp"

namespace rwre::cli {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const DiscreteSites kZeroSpeed{{{0.9, 0.7}, {0.2, 0.3}}};
const DiscreteSites kLight{{{0.8, 0.9}, {0.4, 0.1}}};
const BondWeights kBonds{{{1.0, 0.5}, {4.0, 0.5}}};
const Rates kRates{{{1.0, 0.5}, {4.0, 0.5}}};
const BoundedJump kMixed{2, 2,
                         {{{0.1, 0.2, 0.1, 0.3, 0.3}, 0.5},
                          {{0.2, 0.2, 0.1, 0.2, 0.3}, 0.3},
                          {{0.05, 0.3, 0.2, 0.3, 0.15}, 0.2}}};

double top_eigen_log(const BoundedJump& law) {
  const TransferMatrix tm = transfer_matrix(law.atoms.front().probs, law.L, law.R);
  Eigen::EigenSolver<Eigen::MatrixXd> es(tm.m);
  double best = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) best = std::max(best, std::abs(es.eigenvalues()[i]));
  return std::log(best);
}

struct Moments {
  double mean = 0, var = 0;
  int64_t n = 0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    var += d * (x - mean);
  }
  double se() const { return n > 1 ? std::sqrt(var / static_cast<double>(n - 1) / static_cast<double>(n)) : kInf; }
};

}  // namespace

ScenarioResult kappa_preset(Params& P) {
  const double tol_root = P.tol("closed_form", 1e-10);
  const double tol_legendre = P.tol("legendre", 1e-6);
  const double tol_diode = P.tol("diode", 5e-5);
  if (P.done()) return {};

  ScenarioResult r;
  Table t("kappa", {{"law", ColumnType::Text}, {"eta", ColumnType::Real}, {"kappa", ColumnType::Real},
                    {"closed_form", ColumnType::Real}, {"legendre_ratio", ColumnType::Real}, {"eps_star", ColumnType::Real}});
  const TwoPointSites two{0.8, 0.7};
  const double k_two = kappa(two).kappa;
  const double closed = std::log(4.0) / std::log(7.0 / 3.0);
  const auto [ratio_two, eps_two] = kappa_from_legendre(two);
  t.add({label(two), eta(two), k_two, closed, ratio_two, eps_two});
  r.check("root finder vs ln 4 / ln(7/3)", std::abs(k_two - closed) <= tol_root, k_two, pm(closed, tol_root));
  r.check("min I(eps)/eps vs kappa: " + label(two), std::abs(ratio_two - k_two) <= tol_legendre, ratio_two, pm(k_two, tol_legendre));

  const double k_zero = kappa(kZeroSpeed).kappa;
  const auto [ratio_zero, eps_zero] = kappa_from_legendre(kZeroSpeed);
  t.add({label(kZeroSpeed), eta(kZeroSpeed), k_zero, std::nan(""), ratio_zero, eps_zero});
  r.check("min I(eps)/eps vs kappa: " + label(kZeroSpeed), std::abs(ratio_zero - k_zero) <= tol_legendre, ratio_zero,
          pm(k_zero, tol_legendre));

  const Diode diode{0.3, 1 / 0.09};
  const double k_diode = kappa(diode).kappa;
  const double diode_closed = -std::log(0.3) / std::log(1 / 0.09);
  t.add({label(diode), -kInf, k_diode, diode_closed, std::nan(""), std::nan("")});
  r.check("diode kappa = -ln alpha / ln rho = 0.5000", std::abs(k_diode - 0.5) <= tol_diode && std::abs(k_diode - diode_closed) <= tol_root,
          k_diode, pm(0.5, tol_diode));
  r.tables.push_back(std::move(t));

  Plot plot{"cgf_plot", "F(u) = ln E rho^u", "u", "F(u)", false, false, {}};
  for (const EnvironmentLaw& l : {EnvironmentLaw{two}, EnvironmentLaw{kZeroSpeed}}) {
    Series s{label(l), {}, {}, false};
    for (int i = 0; i <= 100; ++i) {
      s.x.push_back(i * 0.025);
      s.y.push_back(cgf(l, i * 0.025));
    }
    plot.series.push_back(std::move(s));
  }
  r.plots.push_back(std::move(plot));
  return r;
}

ScenarioResult environment_identities(Params& P) {
  const EnvironmentLaw law = P.law("law", kLight);
  const int64_t n_env = P.integer("n_env", 100000);
  const int64_t heavy_env = P.integer("heavy_n_env", 20000);
  const double tol_f = P.tol("f_abs", 0.01);
  const double tol_v = P.tol("drift_rel", 0.01);
  const double tol_d = P.tol("delta_abs", 0.01);
  if (!(mean_rho(law) < 1)) throw ConfigError("params.law: needs E rho < 1");
  if (P.done()) return {};

  ScenarioResult r;
  const auto run = [&](const EnvironmentLaw& l, int64_t n, uint64_t seed) {
    std::vector<double> f(static_cast<size_t>(n)), df(f.size()), d(f.size());
    parallel_for(n, P.threads(), [&](int64_t i) {
      Environment e(l, env_seed_for(seed, static_cast<uint64_t>(i)));
      const size_t k = static_cast<size_t>(i);
      f[k] = invariant_density_f(e).value;
      df[k] = (2 * e.p(0) - 1) * f[k];
      d[k] = harmonic_increment(e, 0).value;
    });
    std::array<Moments, 3> m;
    for (size_t k = 0; k < f.size(); ++k) {
      m[0].add(f[k]);
      m[1].add(df[k]);
      m[2].add(d[k]);
    }
    return m;
  };
  const double v = velocity(law);
  const auto m = run(law, n_env, sub_seed(P.seed(), 0));
  r.check("E f = 1", std::abs(m[0].mean - 1) <= tol_f, m[0].mean, pm(1, tol_f), "se " + num(m[0].se()) + ", kappa " + num(kappa(law).kappa));
  r.check("E (p0 - q0) f = v", std::abs(m[1].mean - v) <= tol_v * v, m[1].mean, pm(v, tol_v * v), "se " + num(m[1].se()));
  r.check("E Delta(0) = 0", std::abs(m[2].mean) <= tol_d, m[2].mean, pm(0, tol_d), "se " + num(m[2].se()));
  const TwoPointSites heavy{0.8, 0.7};
  const auto h = run(heavy, heavy_env, sub_seed(P.seed(), 1));
  Table t("identities", {{"law", ColumnType::Text}, {"n_env", ColumnType::Integer}, {"kappa", ColumnType::Real},
                         {"mean_f", ColumnType::Real}, {"se_f", ColumnType::Real}, {"mean_drift_f", ColumnType::Real},
                         {"v", ColumnType::Real}, {"mean_delta", ColumnType::Real}, {"se_delta", ColumnType::Real}});
  t.add({label(law), n_env, kappa(law).kappa, m[0].mean, m[0].se(), m[1].mean, v, m[2].mean, m[2].se()});
  t.add({label(heavy), heavy_env, kappa(heavy).kappa, h[0].mean, h[0].se(), h[1].mean, velocity(heavy), h[2].mean, h[2].se()});
  r.tables.push_back(std::move(t));
  r.metrics["heavy_tail_mean_f"] = h[0].mean;
  return r;
}

ScenarioResult bonds_preset(Params& P) {
  const EnvironmentLaw law = P.law("law", kBonds);
  const int64_t n_env = P.integer("n_env", 1000);
  const auto grid = P.integers("n_grid", {10000, 100000, 1000000, 10000000});
  const double level = P.tol("ks_level", 0.05);
  if (site_model(law) != SiteModel::Bond) throw ConfigError("params.law: needs a bond law");
  if (grid.size() < 2 || !std::is_sorted(grid.begin(), grid.end())) throw ConfigError("params.n_grid: need increasing values");
  if (P.done()) return {};

  ScenarioResult r;
  const Conductivity c = conductivity_and_ema(law, 1000000, sub_seed(P.seed(), 9));
  double exact_bar = 0, ec = 0;
  for (const auto& a : std::get<BondWeights>(law).atoms) {
    exact_bar += a.weight / a.value;
    ec += a.weight * a.value;
  }
  exact_bar = 1 / exact_bar;
  r.check("c_bar = (E 1/c)^-1 from atoms", std::abs(c.c_bar - exact_bar) <= 1e-12 * exact_bar, c.c_bar, num(exact_bar));
  const double sigma2 = c.sigma2;
  const EnsembleResult e = run_ensemble(law, ensemble_spec(n_env, 1, grid.back(), grid, sub_seed(P.seed(), 0), P.threads()));
  bool increasing = true;
  std::string seq;
  for (size_t i = 0; i < e.stats.size(); ++i) {
    if (i && !(e.stats[i].mean_returns > e.stats[i - 1].mean_returns)) increasing = false;
    seq += (seq.empty() ? "" : ", ") + num(e.stats[i].mean_returns);
  }
  r.check("mean returns to the origin strictly increasing", increasing, e.stats.back().mean_returns, "increasing", seq);
  const double n = static_cast<double>(grid.back());
  const KsResult ks = ks_normal(e.positions_at(e.stats.size() - 1), 0.0, sigma2 * n, level);
  r.check("X_n / sqrt(sigma^2 n) passes KS", ks.pass, ks.distance, "p >= " + num(level),
          "p = " + num(ks.p_value) + ", sigma^2 = (E c E 1/c)^-1 = " + num(sigma2) + ", E c = " + num(ec));
  r.metrics["sigma2"] = sigma2;
  r.metrics["c_bar"] = c.c_bar;
  Table t("bond_returns", {{"n", ColumnType::Integer}, {"mean_returns", ColumnType::Real}, {"var_x", ColumnType::Real},
                           {"var_over_sigma2_n", ColumnType::Real}});
  Plot plot{"returns_plot", "mean number of returns to 0", "n", "returns", true, true, {}};
  Series s{"bonds", {}, {}, true};
  for (const auto& st : e.stats) {
    t.add({st.step, st.mean_returns, st.var, st.var / (sigma2 * static_cast<double>(st.step))});
    s.x.push_back(static_cast<double>(st.step));
    s.y.push_back(st.mean_returns);
  }
  plot.series = {s};
  r.tables.push_back(std::move(t));
  r.plots.push_back(std::move(plot));
  return r;
}

ScenarioResult lyapunov_preset(Params& P) {
  const int64_t n = P.integer("n", 1000000);
  const auto laws = P.laws("classify_laws", {as_bounded_jump(TwoPointSites{0.3, 0.3}), as_bounded_jump(TwoPointSites{0.8, 0.3}),
                                             BoundedJump{2, 1, {{{0.1, 0.2, 0.0, 0.7}, 1.0}}}, kMixed,
                                             BoundedJump{2, 2, {{{0.1, 0.3, 0.2, 0.3, 0.1}, 0.5}, {{0.2, 0.2, 0.2, 0.2, 0.2}, 0.5}}}});
  const double tol_det = P.tol("nonrandom_abs", 1e-6);
  const double z = P.tol("z", 3.0);
  for (const auto& l : laws)
    if (!std::holds_alternative<BoundedJump>(l)) throw ConfigError("params.classify_laws: bounded_jump laws only");
  if (P.done()) return {};

  ScenarioResult r;
  const TwoPointSites site{0.3, 0.3};
  const LyapunovEstimate g1 = top_lyapunov(as_bounded_jump(site), n, sub_seed(P.seed(), 0));
  r.check("L = R = 1 top exponent equals eta", std::abs(g1.gamma - eta(site)) <= z * g1.se, g1.gamma, pm(eta(site), z * g1.se));

  const BoundedJump fixed{2, 1, {{{0.1, 0.2, 0.0, 0.7}, 1.0}}};
  const double lam = (3.0 / 7.0 + std::sqrt(9.0 / 49.0 + 4.0 / 7.0)) / 2.0;
  const LyapunovEstimate g2 = top_lyapunov(fixed, n, sub_seed(P.seed(), 1));
  r.check("non-random 2x2: top exponent equals ln lambda_1", std::abs(g2.gamma - std::log(lam)) <= tol_det, g2.gamma,
          pm(std::log(lam), tol_det), "lambda_1 = " + num(lam) + ", eigen solver ln|lambda| = " + num(top_eigen_log(fixed)));

  const LyapunovSpectrum s = lyapunov_spectrum(kMixed, 3, n, sub_seed(P.seed(), 2));
  r.check("mixed L = R = 2: gamma_1 > 0 > gamma_3", s.gamma[0] - z * s.se[0] > 0 && s.gamma[2] + z * s.se[2] < 0, s.gamma[0],
          "gamma_1 > 0 > gamma_3", "gamma = " + num(s.gamma[0]) + ", " + num(s.gamma[1]) + ", " + num(s.gamma[2]));
  Table sp("spectrum", {{"index", ColumnType::Integer}, {"gamma", ColumnType::Real}, {"se", ColumnType::Real}});
  Plot plot{"spectrum_plot", "Lyapunov spectrum of the mixed L = R = 2 law", "index", "gamma", false, false, {}};
  Series ps{"gamma_i", {}, {}, true};
  for (size_t i = 0; i < s.gamma.size(); ++i) {
    sp.add({static_cast<int64_t>(i + 1), s.gamma[i], s.se[i]});
    ps.x.push_back(static_cast<double>(i + 1));
    ps.y.push_back(s.gamma[i]);
  }
  plot.series = {ps};

  Table cl("classification", {{"law", ColumnType::Text}, {"gamma_R", ColumnType::Real}, {"se", ColumnType::Real},
                              {"class", ColumnType::Text}});
  for (size_t k = 0; k < laws.size(); ++k) {
    const BoundedClassification b = classify_bounded(std::get<BoundedJump>(laws[k]), n, sub_seed(P.seed(), 10 + k), z);
    cl.add({label(laws[k]), b.gamma_R, b.se, std::string(to_string(b.kind))});
  }
  r.tables.push_back(std::move(sp));
  r.tables.push_back(std::move(cl));
  r.plots.push_back(std::move(plot));
  return r;
}

ScenarioResult ctrw_ema(Params& P) {
  const EnvironmentLaw law = P.law("law", kRates);
  const auto s_grid = P.reals("s_grid", {1e-5, 2e-5, 5e-5, 1e-4, 2e-4, 5e-4, 1e-3});
  const int64_t cf_env = P.integer("cf_n_env", 400);
  const int64_t sim_env = P.integer("sim_n_env", 4000);
  const int64_t sim_walks = P.integer("sim_n_walks", 40);
  const double t_max = P.real("t_max", 1000.0);
  const double tol_cf = P.tol("closed_form", 1e-10);
  const double tol_slope = P.tol("slope_abs", 0.025);
  const double tol_c = P.tol("c_star_rel", 0.05);
  const double tol_p = P.tol("p00_rel", 0.10);
  if (site_model(law) != SiteModel::Bond || std::holds_alternative<BondWeights>(law))
    throw ConfigError("params.law: needs a rate law");
  if (P.done()) return {};

  ScenarioResult r;
  double worst = 0;
  for (double c : {0.5, 2.0}) {
    Environment env(Rates{{{c, 1.0}}}, 1);
    for (double s : {1e-4, 1e-2, 1.0, 10.0}) {
      const double exact = 1 / std::sqrt(s * s + 4 * c * s);
      worst = std::max(worst, std::abs(laplace_p00(env, s).value - exact) / exact);
    }
  }
  r.check("continued fraction vs constant-rate closed form", worst <= tol_cf, worst, "<= " + num(tol_cf), "relative");
  const Conductivity cond = conductivity_and_ema(law, 1000000, sub_seed(P.seed(), 3));
  const ReturnAsymptote a = annealed_return_asymptote(law, s_grid, cf_env, sub_seed(P.seed(), 0), 2048, P.threads());
  r.check("annealed Laplace slope", std::abs(a.slope + 0.5) <= tol_slope, a.slope, pm(-0.5, tol_slope),
          "fit s in [" + num(a.fit_lo) + ", " + num(a.fit_hi) + "]");
  r.check("c_* vs (E 1/c)^-1", std::abs(a.c_star - cond.c_bar) <= tol_c * cond.c_bar, a.c_star, pm(cond.c_bar, tol_c * cond.c_bar));

  std::vector<double> times;
  for (double t = 1; t < t_max; t *= 2) times.push_back(t);
  times.push_back(t_max);
  const CtrwEnsemble sim = run_ctrw_ensemble(law, sim_env, sim_walks, times, sub_seed(P.seed(), 1), P.threads());
  const double c_star = cond.c_bar;
  const double scaled = sim.p00.back() * std::sqrt(4 * std::numbers::pi * c_star * t_max);
  const double pairs = static_cast<double>(sim_env * sim_walks);
  r.check("p00(t) sqrt(4 pi c_* t) at large t", std::abs(scaled - 1) <= tol_p, scaled, pm(1, tol_p),
          "t = " + num(t_max) + ", binomial se " + num(std::sqrt(sim.p00.back() * (1 - sim.p00.back()) / pairs) * scaled / std::max(sim.p00.back(), 1e-300)));
  r.check("delta_* > delta_1", cond.delta_star > cond.delta1 && cond.delta_star > cond.delta1_mc + 3 * cond.delta1_mc_se,
          cond.delta_star - cond.delta1, "> 0", "delta_1 = " + num(cond.delta1) + " (mc " + num(cond.delta1_mc) + "), delta_* = " + num(cond.delta_star));
  r.metrics["c_bar"] = cond.c_bar;
  r.metrics["c_star_fit"] = a.c_star;
  r.metrics["delta1"] = cond.delta1;
  r.metrics["delta_star"] = cond.delta_star;

  Table lt("laplace", {{"s", ColumnType::Real}, {"mean_p00", ColumnType::Real}, {"certified", ColumnType::Real},
                       {"ema", ColumnType::Real}});
  Plot lp{"laplace_plot", "annealed Laplace transform of p00", "s", "E p00(s)", true, true, {}};
  Series m{"continued fraction", {}, {}, true}, ema{"EMA (4 c_* s)^-1/2", {}, {}, false};
  for (size_t i = 0; i < a.s.size(); ++i) {
    const double e = 1 / std::sqrt(4 * c_star * a.s[i]);
    lt.add({a.s[i], a.mean_p00[i], a.certified[i], e});
    m.x.push_back(a.s[i]);
    m.y.push_back(a.mean_p00[i]);
    ema.x.push_back(a.s[i]);
    ema.y.push_back(e);
  }
  lp.series = {m, ema};
  Table pt("return_probability", {{"t", ColumnType::Real}, {"p00", ColumnType::Real}, {"scaled", ColumnType::Real}});
  Plot pp{"p00_plot", "p00(t) sqrt(4 pi c_* t)", "t", "scaled p00", true, false, {}};
  Series ps{"simulated", {}, {}, true};
  for (size_t i = 0; i < sim.times.size(); ++i) {
    const double sc = sim.p00[i] * std::sqrt(4 * std::numbers::pi * c_star * sim.times[i]);
    pt.add({sim.times[i], sim.p00[i], sc});
    ps.x.push_back(sim.times[i]);
    ps.y.push_back(sc);
  }
  pp.series = {ps};
  r.tables.push_back(std::move(lt));
  r.tables.push_back(std::move(pt));
  r.plots.push_back(std::move(lp));
  r.plots.push_back(std::move(pp));
  return r;
}

ScenarioResult ctrw_subdiffusive(Params& P) {
  const double alpha = P.real("alpha", 0.5);
  const auto s_grid = P.reals("s_grid", {1e-7, 2e-7, 5e-7, 1e-6, 2e-6, 5e-6, 1e-5});
  const int64_t n_env = P.integer("n_env", 400);
  const double tol = P.tol("exponent_abs", 0.05);
  const RatesPowerLaw law{alpha};
  try {
    check_law(law);
  } catch (const InvalidLaw& e) {
    throw ConfigError(std::string("params.alpha: ") + e.what());
  }
  if (P.done()) return {};

  ScenarioResult r;
  const ReturnAsymptote a = annealed_return_asymptote(law, s_grid, n_env, sub_seed(P.seed(), 0), 2048, P.threads());
  const double theta = (1 - alpha) / (2 - alpha);
  r.check("return exponent theta = 1 + Laplace slope", std::abs(a.return_exponent - theta) <= tol, a.return_exponent, pm(theta, tol),
          "Laplace slope " + num(a.slope) + " (expected " + num(theta - 1) + ")");
  r.check("classified subdiffusive", a.subdiffusive, a.subdiffusive ? 1.0 : 0.0, "true");
  const Conductivity c = conductivity_and_ema(law, 100000, sub_seed(P.seed(), 1));
  r.metrics["laplace_slope"] = a.slope;
  r.metrics["return_exponent"] = a.return_exponent;
  r.metrics["msd_exponent"] = c.msd_exponent;
  r.metrics["predicted_return_exponent"] = c.return_exponent;
  Table t("laplace", {{"s", ColumnType::Real}, {"mean_p00", ColumnType::Real}, {"certified", ColumnType::Real}});
  Plot p{"laplace_plot", "annealed Laplace transform of p00, power-law rates", "s", "E p00(s)", true, true, {}};
  Series m{"continued fraction", {}, {}, true}, fit{"fit", {}, {}, false};
  for (size_t i = 0; i < a.s.size(); ++i) {
    t.add({a.s[i], a.mean_p00[i], a.certified[i]});
    m.x.push_back(a.s[i]);
    m.y.push_back(a.mean_p00[i]);
    fit.x.push_back(a.s[i]);
    fit.y.push_back(std::exp(a.intercept + a.slope * std::log(a.s[i])));
  }
  p.series = {m, fit};
  r.tables.push_back(std::move(t));
  r.plots.push_back(std::move(p));
  return r;
}

ScenarioResult balanced_preset(Params& P) {
  const EnvironmentLaw l2 = P.law("law_d2", Balanced{2, {{{0.1, 0.4}, 0.5}, {{0.4, 0.1}, 0.5}}});
  const EnvironmentLaw l3 = P.law("law_d3", Balanced{3, {{{0.1, 0.2, 0.2}, 1.0 / 3}, {{0.2, 0.1, 0.2}, 1.0 / 3}, {{0.2, 0.2, 0.1}, 1.0 / 3}}});
  const int64_t n_env = P.integer("n_env", 1000);
  const int64_t n_walks = P.integer("n_walks", 1);
  const auto horizons = P.integers("horizons", {10000, 100000, 1000000});
  const double split = P.tol("growth_split", 0.05);
  const double z = P.tol("z", 3.0);
  if (!std::holds_alternative<Balanced>(l2) || std::get<Balanced>(l2).dim != 2) throw ConfigError("params.law_d2: needs a balanced law with dim 2");
  if (!std::holds_alternative<Balanced>(l3) || std::get<Balanced>(l3).dim != 3) throw ConfigError("params.law_d3: needs a balanced law with dim 3");
  if (horizons.size() != 3 || !std::is_sorted(horizons.begin(), horizons.end())) throw ConfigError("params.horizons: need 3 increasing values");
  if (P.done()) return {};

  ScenarioResult r;
  Table t("balanced_returns", {{"dim", ColumnType::Integer}, {"n", ColumnType::Integer}, {"mean_returns", ColumnType::Real},
                               {"se", ColumnType::Real}});
  Table mt("martingale", {{"dim", ColumnType::Integer}, {"axis", ColumnType::Integer}, {"mean_x", ColumnType::Real},
                          {"se_x", ColumnType::Real}, {"mean_x2_minus_2qv", ColumnType::Real}, {"se_x2", ColumnType::Real}});
  Plot plot{"returns_plot", "mean returns to the origin", "n", "returns", true, false, {}};
  for (int d : {2, 3}) {
    const Balanced& law = std::get<Balanced>(d == 2 ? l2 : l3);
    const auto recs = run_balanced_ensemble(law, n_env, n_walks, horizons.back(), horizons, sub_seed(P.seed(), static_cast<uint64_t>(d)), P.threads());
    std::vector<Moments> ret(horizons.size());
    std::array<Moments, 3> mx, mq;
    for (const auto& rec : recs) {
      for (size_t h = 0; h < horizons.size(); ++h) ret[h].add(static_cast<double>(rec.returns[h]));
      for (int i = 0; i < d; ++i) {
        const double x = static_cast<double>(rec.pos.back()[static_cast<size_t>(i)]);
        mx[static_cast<size_t>(i)].add(x);
        mq[static_cast<size_t>(i)].add(x * x - 2 * rec.qv.back()[static_cast<size_t>(i)]);
      }
    }
    Series s{"d = " + std::to_string(d), {}, {}, false};
    for (size_t h = 0; h < horizons.size(); ++h) {
      t.add({static_cast<int64_t>(d), horizons[h], ret[h].mean, ret[h].se()});
      s.x.push_back(static_cast<double>(horizons[h]));
      s.y.push_back(ret[h].mean);
    }
    plot.series.push_back(std::move(s));
    // growth over the last decade, relative to the final count
    const double growth = (ret[2].mean - ret[1].mean) / ret[2].mean;
    const std::string detail = "returns " + num(ret[0].mean) + ", " + num(ret[1].mean) + ", " + num(ret[2].mean);
    if (d == 2) {
      const bool up = ret[1].mean > ret[0].mean && ret[2].mean > ret[1].mean;
      r.check("d = 2 returns keep growing", up && growth >= split, growth, "relative last-decade growth >= " + num(split), detail);
    } else {
      r.check("d = 3 returns saturate", growth < split, growth, "relative last-decade growth < " + num(split), detail);
    }
    for (int i = 0; i < d; ++i) {
      const auto& a = mx[static_cast<size_t>(i)];
      const auto& b = mq[static_cast<size_t>(i)];
      mt.add({static_cast<int64_t>(d), static_cast<int64_t>(i + 1), a.mean, a.se(), b.mean, b.se()});
      r.check("d = " + std::to_string(d) + " axis " + std::to_string(i + 1) + ": E X_n = 0", std::abs(a.mean) <= z * a.se(), a.mean,
              pm(0, z * a.se()));
      r.check("d = " + std::to_string(d) + " axis " + std::to_string(i + 1) + ": E(X_n^2 - 2 qv) = 0", std::abs(b.mean) <= z * b.se(),
              b.mean, pm(0, z * b.se()));
    }
  }
  r.tables.push_back(std::move(t));
  r.tables.push_back(std::move(mt));
  r.plots.push_back(std::move(plot));
  return r;
}

ScenarioResult selftest(Params& P) {
  const int64_t sym_walks = P.integer("symmetric_jump_walks", 25000);
  if (P.done()) return {};

  ScenarioResult r;
  const auto close = [](double a, double b, double tol) { return std::abs(a - b) <= tol; };
  {
    Environment env = realize(TwoPointSites{1.0, 0.6}, P.seed(), -5, 5);
    bool all = true;
    for (int64_t x = -5; x <= 5; ++x) all = all && env.p(x) == 0.6;
    r.check("degenerate two-point law gives p = 0.6 everywhere", all, env.p(0), "0.6");
  }
  {
    const TwoPointSites law{0.4, 0.3};
    Environment a(law, P.seed()), b(law, P.seed());
    a.ensure(0, 10);
    std::vector<double> first;
    for (int64_t x = 0; x <= 10; ++x) first.push_back(a.p(x));
    a.ensure(-10, 10);
    b.ensure(-10, 10);
    bool same = true;
    for (int64_t x = 0; x <= 10; ++x) same = same && a.p(x) == first[static_cast<size_t>(x)] && b.p(x) == first[static_cast<size_t>(x)];
    r.check("window growth keeps realized sites", same, 0, "identical sites");
  }
  {
    Environment h(DiscreteSites{{{0.5, 1.0}}}, 1), s(DiscreteSites{{{0.7, 1.0}}}, 1);
    r.check("p = 0.5 gives rho = 1", h.rho(0) == 1.0, h.rho(0), "1");
    r.check("p = 0.7 gives rho = 3/7", close(s.rho(0), 3.0 / 7.0, 1e-15), s.rho(0), "3/7");
    const LawReport rep = validate(DiscreteSites{{{0.5, 1.0}}});
    r.check("symmetric law: ellipticity 0.5, eta = 0", rep.ellipticity && *rep.ellipticity == 0.5 && eta(DiscreteSites{{{0.5, 1.0}}}) == 0,
            rep.ellipticity.value_or(-1), "0.5");
    r.check("symmetric gambler's ruin: 1 - u_1 = 1/10", close(ruin_profile(h, 10).escape, 0.1, 1e-14), ruin_profile(h, 10).escape, "0.1");
    const TruncatedSeries tau = quenched_mean_tau(h);
    r.check("p = 0.5: quenched mean excursion diverges", !tau.converged || tau.infinite, tau.value, "not converged");
    const Potential y = potential(h, -10, 10);
    r.check("rho = 1: potential vanishes", std::all_of(y.y.begin(), y.y.end(), [](double v) { return v == 0; }), 0, "0");
    r.check("E rho = 1: mean excursion is infinite", std::isinf(mean_excursion(DiscreteSites{{{0.5, 1.0}}}).mean_w),
            mean_excursion(DiscreteSites{{{0.5, 1.0}}}).mean_w, "inf");
  }
  {
    Environment d(DiscreteSites{{{1.0, 1.0}}}, 1);
    r.check("diode at 0: M0 = 0", progeny_M0(d).value == 0, progeny_M0(d).value, "0");
  }
  {
    const DiscreteSites c{{{0.6, 1.0}}};
    const TrapBound tb = trap_bound(c, 10, 0.1);
    r.check("constant law: no traps", std::isinf(tb.rate) && tb.bound == 0, tb.bound, "rate inf, bound 0");
    const TwoPointSites two{0.8, 0.7};
    const double i_eta = legendre(two, eta(two));
    r.check("I(eta) = 0, bound 1", close(i_eta, 0, 1e-9) && close(std::exp(-10 * i_eta), 1, 1e-8), i_eta, "0");
    r.check("constant p = 0.6: v = 0.2", close(velocity(c), 0.2, 1e-15), velocity(c), "0.2");
  }
  {
    const auto atoms = diode_excursion_atoms(0.3, 1.0, 6);
    bool ok = true;
    for (size_t k = 0; k < atoms.size(); ++k) ok = ok && close(atoms[k].first, 2.0 * static_cast<double>(k + 1), 1e-12);
    r.check("rho = 1: t_k = 2(k + 1)", ok, atoms.back().first, "14");
    bool sym = true;
    for (double x : {0.1, 0.7, 1.5, 4.0}) sym = sym && sinai_density(x) == sinai_density(-x);
    r.check("G' is even", sym, sinai_density(0.7), "G'(x) = G'(-x)");
  }
  {
    const BoundedJump sym{2, 2, {{{0.1, 0.3, 0.2, 0.3, 0.1}, 0.5}, {{0.2, 0.2, 0.2, 0.2, 0.2}, 0.5}}};
    const BoundedClassification b = classify_bounded(sym, 100000, sub_seed(P.seed(), 1));
    r.check("symmetric bounded-jump law is indeterminate", b.kind == BoundedClass::Indeterminate, b.gamma_R, "Indeterminate");
  }
  {
    Environment env(Rates{{{1.0, 0.5}, {4.0, 0.5}}}, P.seed());
    const double c = env.bond(0), s = 0.3;
    const GBracket g = g_bracket(env, 0, +1, s, 1);
    r.check("depth-1 bracket: (1/c + 1/s)^-1", close(g.lower, 1 / (1 / c + 1 / s), 1e-14), g.lower, num(1 / (1 / c + 1 / s)));
    const double big = 1e8;
    r.check("s p00(s) -> 1", close(big * laplace_p00(env, big).value, 1, 1e-6), big * laplace_p00(env, big).value, "1");
  }
  {
    Environment env(DiscreteSites{{{1.0, 1.0}}}, 1);
    WalkSpec s;
    s.steps = 1000;
    s.checkpoints = {1000};
    s.levels = {1, 10, 1000};
    const TrajectoryRecord rec = run_walk(env, s, 3);
    r.check("p = 1: X_n = n and T_n = n", rec.final_pos == 1000 && rec.hit_time == s.levels, static_cast<double>(rec.final_pos), "1000");
  }
  {
    EnsembleSpec es = ensemble_spec(10, 10, 20000, {20000}, sub_seed(P.seed(), 2), P.threads());
    es.walk.levels = {1, 3, 10, 30, 100};
    const EnsembleResult e = run_ensemble(TwoPointSites{0.8, 0.7}, es);
    bool ok = true;
    int64_t hits = 0;
    for (const auto& rec : e.records)
      for (size_t l = 0; l < rec.levels.size(); ++l) {
        if (rec.hit_time[l] < 0) continue;
        ++hits;
        ok = ok && (rec.hit_time[l] - rec.levels[l]) % 2 == 0 && rec.hit_time[l] == rec.levels[l] + 2 * rec.left_at_hit[l];
      }
    r.check("T_n - n even; left-step identity", ok && hits > 0, static_cast<double>(hits), "all hits");
  }
  {
    const TwoPointSites site{0.4, 0.3};
    Environment a(site, P.seed()), b(as_bounded_jump(site), P.seed());
    WalkSpec s;
    s.steps = 20000;
    s.checkpoints = {20000};
    s.record_path = true;
    const bool same = run_walk(a, s, 5).path == run_bounded_jump(b, s, 5).path;
    r.check("L = R = 1 bounded jumps reproduce the nearest-neighbour walk", same, 0, "bit-identical paths");
  }
  {
    const BoundedJump sym{2, 2, {{{0.1, 0.3, 0.2, 0.3, 0.1}, 0.5}, {{0.2, 0.2, 0.2, 0.2, 0.2}, 0.5}}};
    WalkSpec s;
    s.steps = 100000;
    s.checkpoints = {100000};
    const auto recs = run_bounded_jump_ensemble(sym, sym_walks, 1, s, sub_seed(P.seed(), 3), P.threads());
    double pos = 0;
    for (const auto& rec : recs) pos += rec.final_pos > 0;
    pos /= static_cast<double>(recs.size());
    r.check("symmetric jumps: P{X_n > 0} = 0.5", close(pos, 0.5, 0.01), pos, pm(0.5, 0.01), "n = 1e5, " + std::to_string(recs.size()) + " walks");
  }
  {
    const Balanced simple{2, {{{0.25, 0.25}, 1.0}}};
    const auto recs = run_balanced_ensemble(simple, 1, 20000, 1000, {1000}, sub_seed(P.seed(), 4), P.threads());
    Moments m, m2;
    for (const auto& rec : recs) {
      const auto& p = rec.pos.back();
      m.add(static_cast<double>(p[0]));
      m2.add(static_cast<double>(p[0] * p[0] + p[1] * p[1]));
    }
    r.check("simple balanced walk: E X_n = 0", std::abs(m.mean) <= 3 * m.se(), m.mean, pm(0, 3 * m.se()));
    r.check("simple balanced walk: E|X_n|^2 = n", close(m2.mean, 1000, 20), m2.mean, pm(1000, 20));
  }
  {
    std::vector<int64_t> up(101);
    for (int64_t i = 0; i <= 100; ++i) up[static_cast<size_t>(i)] = i;
    r.check("monotone path: every step regenerates", regeneration_diagnostic(up).size() == 100,
            static_cast<double>(regeneration_diagnostic(up).size()), "100");
  }
  {
    EnsembleSpec es = ensemble_spec(20, 5, 100000, geometric_checkpoints(100000, 8), sub_seed(P.seed(), 5), P.threads());
    es.walk.levels = {500, 1000, 2000, 5000, 10000};
    const EnsembleResult e = run_ensemble(DiscreteSites{{{0.6, 1.0}}}, es);
    const ScalingFit v = velocity_fit(e, 1000, 100, sub_seed(P.seed(), 6));
    r.check("constant p = 0.6: velocity slope 0.2", close(v.slope, 0.2, 0.002), v.slope, pm(0.2, 0.002));
    const ScalingFit h = hitting_scaling(e, 100, sub_seed(P.seed(), 7));
    r.check("constant p = 0.6: hitting slope 1", close(h.slope, 1, 0.02), h.slope, pm(1, 0.02));
  }
  {
    CounterRng rng(sub_seed(P.seed(), 8), Stream::Aux);
    std::vector<double> ex(10000), gauss(10000);
    for (auto& x : ex) x = -std::log(rng.uniform_pos());
    for (size_t i = 0; i < gauss.size(); i += 2) {
      const double rad = std::sqrt(-2 * std::log(rng.uniform_pos())), ang = 2 * std::numbers::pi * rng.uniform();
      gauss[i] = rad * std::cos(ang);
      gauss[i + 1] = rad * std::sin(ang);
    }
    const TailIndex ti = tail_index(ex, 100, sub_seed(P.seed(), 9));
    r.check("exponential samples flagged light-tailed", ti.large, ti.index, "index > 5");
    const KsResult ks = ks_normal(gauss, 0, 1);
    r.check("normal samples pass KS", ks.pass, ks.distance, "p >= 0.05", "p = " + num(ks.p_value));
  }
  Table t("selftest", {{"check", ColumnType::Text}, {"pass", ColumnType::Boolean}, {"value", ColumnType::Real},
                       {"expected", ColumnType::Text}});
  for (const auto& c : r.checks) t.add({c.name, c.pass, c.value, c.expected});
  r.tables.push_back(std::move(t));
  return r;
}

}  // namespace rwre::cli
