#pragma once
// Named experiments. Each scenario reads its parameters through Params, which
// records the effective values and rejects keys nobody asked for.

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "cli/config.hpp"
#include "cli/output.hpp"
#include "rwre/envgen.hpp"

namespace rwre::cli {

class Params {
 public:
  Params(const ExperimentConfig& cfg, bool dry);

  double real(const std::string& key, double def);
  int64_t integer(const std::string& key, int64_t def);
  std::vector<double> reals(const std::string& key, const std::vector<double>& def);
  std::vector<int64_t> integers(const std::string& key, const std::vector<int64_t>& def);
  EnvironmentLaw law(const std::string& key, const EnvironmentLaw& def);
  std::vector<EnvironmentLaw> laws(const std::string& key, const std::vector<EnvironmentLaw>& def);
  double tol(const std::string& key, double def);

  /// Call after the last lookup: rejects unused keys, then reports whether
  /// this is a dry run (validation only).
  bool done();

  uint64_t seed() const { return seed_; }
  int threads() const { return threads_; }
  void set_threads(int t) { threads_ = t; }

  const json& effective() const { return effective_; }
  const json& effective_tol() const { return effective_tol_; }

 private:
  const json* find(const std::string& key);

  json params_, tolerances_;
  json effective_ = json::object(), effective_tol_ = json::object();
  std::set<std::string> used_, used_tol_;
  uint64_t seed_;
  int threads_ = 1;
  bool dry_;
};

using ScenarioFn = std::function<ScenarioResult(Params&)>;

struct ScenarioInfo {
  std::string name;
  std::string summary;
  bool preset = false;
  ScenarioFn fn;
};

const std::vector<ScenarioInfo>& scenarios();
std::vector<std::string> presets();
const ScenarioInfo& find_scenario(const std::string& name);

ExperimentConfig preset_config(const std::string& name, uint64_t seed = 1);

/// Checks the scenario name and every parameter without running anything.
void validate(const ExperimentConfig& cfg);

/// threads = 0 resolves to default_threads().
ScenarioResult run_scenario(const ExperimentConfig& cfg, int threads = 0);

}  // namespace rwre::cli
