// Acceptance run: every criterion at full budget, one PASS/FAIL line each.
// Usage: acceptance [criterion numbers...]   (default: all)
// Scenario outputs land in $RWRE_ACCEPTANCE_OUT (default acceptance_out).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli/config.hpp"
#include "cli/output.hpp"
#include "cli/scenarios.hpp"
#include "rwre/parallel.hpp"

using namespace rwre::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;
  void fail(const std::string& s) {
    pass = false;
    notes.push_back(s);
  }
};

fs::path out_root() {
  const char* e = std::getenv("RWRE_ACCEPTANCE_OUT");
  return e && *e ? fs::path(e) : fs::path("acceptance_out");
}

int threads() { return rwre::default_threads(); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs a preset at seed 1, writes its outputs and folds its checks into o.
// Returns wall seconds.
double run_preset(const std::string& name, Outcome& o, ScenarioResult* keep = nullptr) {
  ExperimentConfig cfg = preset_config(name, 1);
  cfg.threads = threads();
  cfg.output = (out_root() / name).string();
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioResult r;
  try {
    r = run_scenario(cfg, cfg.threads);
  } catch (const std::exception& e) {
    o.fail("  FAIL " + name + ": error: " + e.what());
    return seconds_since(t0);
  }
  const double wall = seconds_since(t0);
  write_result(cfg.output, cfg, r);
  write_timing(cfg.output, wall, cfg.threads);
  for (const auto& c : r.checks) {
    std::string line = name + ": " + c.name + " = " + format_real(c.value) + " (expected " + c.expected + ")";
    if (!c.detail.empty()) line += "; " + c.detail;
    if (c.pass)
      o.notes.push_back("  ok   " + line);
    else
      o.fail("  FAIL " + line);
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s: %.1f s on %d threads", name.c_str(), wall, cfg.threads);
  o.notes.push_back(buf);
  if (keep) *keep = std::move(r);
  return wall;
}

// Allowed wall time: the stated budget on 4 cores, scaled to the cores here.
double scaled_budget(double seconds_on_4) { return seconds_on_4 * 4.0 / std::min(4, threads()); }

void runtime_check(Outcome& o, const std::string& what, double wall, double limit) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s runtime %.1f s (limit %.0f s for %d threads)", what.c_str(), wall, limit, threads());
  if (wall <= limit)
    o.notes.push_back(std::string("  ok   ") + buf);
  else
    o.fail(std::string("  FAIL ") + buf);
}

std::map<std::string, std::string> slurp(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().filename() == "timing.json") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[e.path().filename().string()] = ss.str();
  }
  return out;
}

Outcome c1() {
  Outcome o;
  runtime_check(o, "phase-diagram", run_preset("phase-diagram", o), scaled_budget(600));
  return o;
}
Outcome c2() {
  Outcome o;
  run_preset("velocity", o);
  return o;
}
Outcome c3() {
  Outcome o;
  run_preset("slowdown", o);
  return o;
}
Outcome c4() {
  Outcome o;
  run_preset("kappa", o);
  return o;
}
Outcome c5() {
  Outcome o;
  run_preset("stable-scaling", o);
  return o;
}
Outcome c6() {
  Outcome o;
  run_preset("clt", o);
  return o;
}
Outcome c7() {
  Outcome o;
  run_preset("sinai", o);
  return o;
}
Outcome c8() {
  Outcome o;
  ScenarioResult r;
  const double wall = run_preset("figure2", o, &r);
  runtime_check(o, "figure2", wall, scaled_budget(1800));
  const double steps = static_cast<double>(r.effective_params.value("n_env", int64_t{0})) *
                       static_cast<double>(r.effective_params.value("steps", int64_t{0}));
  const double rate = steps / wall;
  const double floor = 2.5e7 * std::min(4, threads());
  char buf[160];
  std::snprintf(buf, sizeof buf, "figure2 throughput %.3g steps/s (floor %.3g)", rate, floor);
  if (rate >= floor)
    o.notes.push_back(std::string("  ok   ") + buf);
  else
    o.fail(std::string("  FAIL ") + buf);
  run_preset("diode-lln", o);
  return o;
}
Outcome c9() {
  Outcome o;
  run_preset("environment-identities", o);
  return o;
}
Outcome c10() {
  Outcome o;
  run_preset("lyapunov", o);
  return o;
}
Outcome c11() {
  Outcome o;
  run_preset("bonds", o);
  return o;
}
Outcome c12() {
  Outcome o;
  run_preset("ctrw-ema", o);
  run_preset("ctrw-subdiffusive", o);
  return o;
}
Outcome c13() {
  Outcome o;
  run_preset("balanced", o);
  return o;
}
Outcome c14() {
  Outcome o;
  runtime_check(o, "selftest", run_preset("selftest", o), 60);

  const std::vector<std::string> configs = {
      R"({"scenario": "ensemble", "seed": 5, "params": {"n_env": 64, "n_walks": 4, "steps": 100000, "levels": [100, 1000, 10000]}})",
      R"({"scenario": "figure2", "seed": 2, "params": {"n_env": 200, "steps": 20000, "fit_min_step": 100}})",
      R"({"scenario": "ctrw-ema", "seed": 3, "params": {"cf_n_env": 50, "sim_n_env": 200, "sim_n_walks": 4}})",
      R"({"scenario": "selftest", "seed": 9, "params": {"symmetric_jump_walks": 400}})",
  };
  for (const auto& text : configs) {
    ExperimentConfig cfg;
    try {
      cfg = parse_config(text);
    } catch (const std::exception& e) {
      o.fail(std::string("  FAIL bad identity config: ") + e.what());
      continue;
    }
    std::map<std::string, std::string> ref;
    for (int t : {1, 2, 4, 7}) {
      cfg.threads = t;
      const fs::path dir = out_root() / "identity" / (cfg.scenario + "_t" + std::to_string(t));
      fs::remove_all(dir);
      ScenarioResult r;
      try {
        r = run_scenario(cfg, t);
      } catch (const std::exception& e) {
        o.fail("  FAIL " + cfg.scenario + ": " + e.what());
        break;
      }
      write_result(dir.string(), cfg, r);
      const auto files = slurp(dir);
      if (ref.empty()) {
        ref = files;
      } else if (files != ref) {
        o.fail("  FAIL " + cfg.scenario + ": outputs differ between 1 and " + std::to_string(t) + " threads");
      }
    }
    if (!ref.empty())
      o.notes.push_back("  ok   " + cfg.scenario + ": " + std::to_string(ref.size()) + " files identical for 1, 2, 4, 7 threads");
  }
  return o;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "phase diagram matches simulated drift sign", c1},
      {2, "velocity formula", c2},
      {3, "slowdown: zero speed and reversed drift sign", c3},
      {4, "critical exponent", c4},
      {5, "stable scaling of hitting times", c5},
      {6, "Gaussian regime", c6},
      {7, "recurrent regime", c7},
      {8, "diode oscillations and n / ln n law", c8},
      {9, "environment seen from the walker", c9},
      {10, "Lyapunov exponents", c10},
      {11, "random bonds", c11},
      {12, "continuous time returns", c12},
      {13, "balanced walks", c13},
      {14, "determinism across threads and selftest", c14},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  std::vector<std::pair<int, bool>> verdicts;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    const Outcome o = c.run();
    for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
    std::printf("%s criterion %d: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.title, seconds_since(t0));
    std::fflush(stdout);
    verdicts.emplace_back(c.id, o.pass);
  }
  int failed = 0;
  std::printf("\nsummary:");
  for (const auto& [id, pass] : verdicts) {
    std::printf(" %d=%s", id, pass ? "PASS" : "FAIL");
    failed += !pass;
  }
  std::printf("\n%d of %zu criteria passed\n", static_cast<int>(verdicts.size()) - failed, verdicts.size());
  return failed == 0 ? 0 : 1;
}
