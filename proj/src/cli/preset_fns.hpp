#pragma once
// Scenario entry points and small helpers shared by their implementations.

#include <cstdio>
#include <string>
#include <vector>

#include "cli/output.hpp"
#include "cli/scenarios.hpp"
#include "rwre/philox.hpp"
#include "rwre/simulate.hpp"

namespace rwre::cli {

ScenarioResult phase_diagram(Params& P);
ScenarioResult velocity_preset(Params& P);
ScenarioResult slowdown(Params& P);
ScenarioResult stable_scaling(Params& P);
ScenarioResult clt_preset(Params& P);
ScenarioResult sinai_preset(Params& P);
ScenarioResult figure2(Params& P);
ScenarioResult diode_lln(Params& P);
ScenarioResult ensemble_scenario(Params& P);

ScenarioResult kappa_preset(Params& P);
ScenarioResult environment_identities(Params& P);
ScenarioResult bonds_preset(Params& P);
ScenarioResult lyapunov_preset(Params& P);
ScenarioResult ctrw_ema(Params& P);
ScenarioResult ctrw_subdiffusive(Params& P);
ScenarioResult balanced_preset(Params& P);
ScenarioResult selftest(Params& P);

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Compact one-line law description (its config JSON).
inline std::string label(const EnvironmentLaw& law) { return law_to_json(law).dump(); }

inline std::string pm(double target, double tol) { return num(target) + " +- " + num(tol); }

/// Independent seed for the k-th sub-experiment of a scenario.
inline uint64_t sub_seed(uint64_t seed, uint64_t k) { return derive_seed(seed, k, 0, 0x5CE7u); }

inline EnsembleSpec ensemble_spec(int64_t n_env, int64_t n_walks, int64_t steps, std::vector<int64_t> checkpoints,
                                  uint64_t seed, int threads, bool keep = true) {
  EnsembleSpec es;
  es.n_env = n_env;
  es.n_walks = n_walks;
  es.walk.steps = steps;
  es.walk.checkpoints = std::move(checkpoints);
  es.base_seed = seed;
  es.threads = threads;
  es.keep_records = keep;
  return es;
}

}  // namespace rwre::cli
