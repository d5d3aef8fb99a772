#include "cli/scenarios.hpp"

#include <algorithm>

#include "cli/preset_fns.hpp"
#include "rwre/parallel.hpp"

namespace rwre::cli {

Params::Params(const ExperimentConfig& cfg, bool dry)
    : params_(cfg.params), tolerances_(cfg.tolerances), seed_(cfg.seed), dry_(dry) {}

const json* Params::find(const std::string& key) {
  used_.insert(key);
  const auto it = params_.find(key);
  return it == params_.end() ? nullptr : &*it;
}

double Params::real(const std::string& key, double def) {
  const json* v = find(key);
  const double out = v ? get_real(params_, key, "params") : def;
  effective_[key] = jnum(out);
  return out;
}

int64_t Params::integer(const std::string& key, int64_t def) {
  const json* v = find(key);
  const int64_t out = v ? get_int(params_, key, "params") : def;
  effective_[key] = out;
  return out;
}

std::vector<double> Params::reals(const std::string& key, const std::vector<double>& def) {
  const json* v = find(key);
  std::vector<double> out = def;
  if (v) {
    if (!v->is_array()) throw ConfigError("params." + key + ": expected an array of numbers");
    out.clear();
    for (size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number()) throw ConfigError("params." + key + "[" + std::to_string(i) + "]: expected a number");
      out.push_back((*v)[i].get<double>());
    }
  }
  json e = json::array();
  for (double d : out) e.push_back(jnum(d));
  effective_[key] = e;
  return out;
}

std::vector<int64_t> Params::integers(const std::string& key, const std::vector<int64_t>& def) {
  const json* v = find(key);
  std::vector<int64_t> out = def;
  if (v) {
    if (!v->is_array()) throw ConfigError("params." + key + ": expected an array of integers");
    out.clear();
    for (size_t i = 0; i < v->size(); ++i) {
      const json& x = (*v)[i];
      if (x.is_number_integer()) {
        out.push_back(x.get<int64_t>());
      } else if (x.is_number_float() && x.get<double>() == static_cast<double>(static_cast<int64_t>(x.get<double>()))) {
        out.push_back(static_cast<int64_t>(x.get<double>()));
      } else {
        throw ConfigError("params." + key + "[" + std::to_string(i) + "]: expected an integer");
      }
    }
  }
  effective_[key] = out;
  return out;
}

EnvironmentLaw Params::law(const std::string& key, const EnvironmentLaw& def) {
  const json* v = find(key);
  EnvironmentLaw out = v ? law_from_json(*v, "params." + key) : def;
  effective_[key] = law_to_json(out);
  return out;
}

std::vector<EnvironmentLaw> Params::laws(const std::string& key, const std::vector<EnvironmentLaw>& def) {
  const json* v = find(key);
  std::vector<EnvironmentLaw> out = def;
  if (v) {
    if (!v->is_array() || v->empty()) throw ConfigError("params." + key + ": expected a non-empty array of laws");
    out.clear();
    for (size_t i = 0; i < v->size(); ++i)
      out.push_back(law_from_json((*v)[i], "params." + key + "[" + std::to_string(i) + "]"));
  }
  json e = json::array();
  for (const auto& l : out) e.push_back(law_to_json(l));
  effective_[key] = e;
  return out;
}

double Params::tol(const std::string& key, double def) {
  used_tol_.insert(key);
  const auto it = tolerances_.find(key);
  const double out = it == tolerances_.end() ? def : it->get<double>();
  effective_tol_[key] = jnum(out);
  return out;
}

bool Params::done() {
  for (const auto& [k, v] : params_.items())
    if (!used_.count(k)) throw ConfigError("params." + k + ": unknown key for this scenario");
  for (const auto& [k, v] : tolerances_.items())
    if (!used_tol_.count(k)) throw ConfigError("tolerances." + k + ": unknown key for this scenario");
  return dry_;
}

const std::vector<ScenarioInfo>& scenarios() {
  static const std::vector<ScenarioInfo> list = {
      {"phase-diagram", "transience classes on an (alpha, beta) grid vs simulated drift sign", true, phase_diagram},
      {"velocity", "ensemble velocity slopes vs the annealed velocity formula", true, velocity_preset},
      {"kappa", "critical exponents by root finding and by the Legendre ratio", true, kappa_preset},
      {"stable-scaling", "median hitting-time scaling and the M0 tail index", true, stable_scaling},
      {"clt", "Gaussian fluctuations of a finite-variance transient law", true, clt_preset},
      {"sinai", "recurrent walk: ln^2 n localization scale and limit law", true, sinai_preset},
      {"figure2", "diode model: displacement exponent and log-periodic minima", true, figure2},
      {"diode-lln", "diode model with alpha * rho = 1: n / ln n law of large numbers", true, diode_lln},
      {"bonds", "random bond weights: recurrence and CLT", true, bonds_preset},
      {"lyapunov", "transfer-matrix Lyapunov spectra and bounded-jump classification", true, lyapunov_preset},
      {"ctrw-ema", "continued fractions, annealed return asymptotics, EMA constants", true, ctrw_ema},
      {"ctrw-subdiffusive", "power-law rates: anomalous return exponent", true, ctrw_subdiffusive},
      {"balanced", "balanced walks: d = 2 vs d = 3 returns, martingale checks", true, balanced_preset},
      {"selftest", "fast deterministic checks of elementary cases", true, selftest},
      {"slowdown", "zero speed despite transience; drift sign opposite to mean drift", false, slowdown},
      {"environment-identities", "invariant density and harmonic coordinate identities", false, environment_identities},
      {"ensemble", "generic annealed ensemble: checkpoint and hitting-time tables", false, ensemble_scenario},
  };
  return list;
}

std::vector<std::string> presets() {
  std::vector<std::string> out;
  for (const auto& s : scenarios())
    if (s.preset) out.push_back(s.name);
  return out;
}

const ScenarioInfo& find_scenario(const std::string& name) {
  for (const auto& s : scenarios())
    if (s.name == name) return s;
  throw ConfigError("config.scenario: unknown scenario '" + name + "'");
}

ExperimentConfig preset_config(const std::string& name, uint64_t seed) {
  const ScenarioInfo& info = find_scenario(name);
  ExperimentConfig c;
  c.scenario = info.name;
  c.seed = seed;
  c.output = "out/" + name;
  return c;
}

void validate(const ExperimentConfig& cfg) {
  Params p(cfg, true);
  find_scenario(cfg.scenario).fn(p);
}

ScenarioResult run_scenario(const ExperimentConfig& cfg, int threads) {
  Params p(cfg, false);
  p.set_threads(threads > 0 ? threads : default_threads());
  ScenarioResult r = find_scenario(cfg.scenario).fn(p);
  r.effective_params = p.effective();
  r.effective_tolerances = p.effective_tol();
  return r;
}

}  // namespace rwre::cli
