#pragma once
// Experiment configs: JSON text with line/column diagnostics, law codecs and
// a stable content hash.

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "rwre/envgen.hpp"

namespace rwre::cli {

using nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string scenario;
  uint64_t seed = 1;
  int threads = 0;          ///< 0 = RWRE_THREADS or hardware concurrency
  std::string output = "out";
  json params = json::object();      ///< scenario parameters (laws, budgets, grids)
  json tolerances = json::object();  ///< acceptance tolerance overrides
};

/// Parses config text. Syntax errors carry "origin:line:col"; semantic errors
/// carry the JSON path of the offending key.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::string& path);

json to_json(const ExperimentConfig& c);

/// FNV-1a 64 of the canonical dump of scenario, seed, params and tolerances.
/// Thread count and output directory do not enter the hash.
uint64_t config_hash(const ExperimentConfig& c);
std::string hex64(uint64_t v);

EnvironmentLaw law_from_json(const json& j, const std::string& path = "law");
json law_to_json(const EnvironmentLaw& law);

/// Typed lookups with path-qualified errors.
double get_real(const json& obj, const std::string& key, const std::string& path);
int64_t get_int(const json& obj, const std::string& key, const std::string& path);

}  // namespace rwre::cli
