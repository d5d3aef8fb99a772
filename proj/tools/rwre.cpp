// rwre: run experiment configs and named presets.

#include <chrono>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "cli/config.hpp"
#include "cli/output.hpp"
#include "cli/scenarios.hpp"
#include "rwre/error.hpp"
#include "rwre/parallel.hpp"

using namespace rwre::cli;

namespace {

void print_checks(const ScenarioResult& r) {
  for (const auto& c : r.checks)
    std::printf("%-4s %s: %s (expected %s)%s%s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), format_real(c.value).c_str(),
                c.expected.c_str(), c.detail.empty() ? "" : "; ", c.detail.c_str());
}

int execute(ExperimentConfig cfg, int threads_override) {
  const int threads = threads_override > 0 ? threads_override : cfg.threads > 0 ? cfg.threads : rwre::default_threads();
  cfg.threads = threads;
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioResult r = run_scenario(cfg, threads);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_result(cfg.output, cfg, r);
  write_timing(cfg.output, wall, threads);
  print_checks(r);
  std::printf("%s: %zu checks, %s; config %s; %.1f s on %d threads; output in %s\n", cfg.scenario.c_str(), r.checks.size(),
              r.passed() ? "all passed" : "FAILED", hex64(config_hash(cfg)).c_str(), wall, threads, cfg.output.c_str());
  return r.passed() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random walks in random environments: simulation and analysis"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "config file (JSON)")->required();
  int run_threads = 0;
  run->add_option("--threads", run_threads, "worker threads (overrides the config)");

  std::string preset_name;
  uint64_t seed = 1;
  int threads = 0;
  std::string out;
  auto* preset = app.add_subcommand("preset", "run a named preset");
  preset->add_option("name", preset_name, "preset name")->required();
  preset->add_option("--seed", seed, "base seed");
  preset->add_option("--threads", threads, "worker threads (default: RWRE_THREADS or all cores)");
  preset->add_option("--out", out, "output directory");

  auto* val = app.add_subcommand("validate", "check a config without running it");
  std::string validate_path;
  val->add_option("config", validate_path, "config file (JSON)")->required();

  auto* list = app.add_subcommand("list", "list presets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return execute(load_config(config_path), run_threads);
    if (*preset) {
      ExperimentConfig cfg = preset_config(preset_name, seed);
      if (!out.empty()) cfg.output = out;
      return execute(cfg, threads);
    }
    if (*val) {
      const ExperimentConfig cfg = load_config(validate_path);
      validate(cfg);
      std::printf("%s: ok (scenario %s, config %s)\n", validate_path.c_str(), cfg.scenario.c_str(), hex64(config_hash(cfg)).c_str());
      return 0;
    }
    if (*list) {
      for (const auto& s : scenarios()) std::printf("%-20s %s%s\n", s.name.c_str(), s.summary.c_str(), s.preset ? "" : " (config only)");
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const rwre::BudgetExhausted& e) {
    std::fprintf(stderr, "budget exhausted: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
