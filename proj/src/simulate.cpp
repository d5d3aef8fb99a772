#include "rwre/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>

#include <json.hpp>

#include "kernels/walk_kernel.hpp"
#include "rwre/error.hpp"
#include "rwre/parallel.hpp"
#include "rwre/philox.hpp"
#include "rwre/stats.hpp"

namespace rwre {
namespace {

using nlohmann::json;

constexpr int64_t kBatch = kernels::kLanes;

json record_to_json(const TrajectoryRecord& r) {
  return json{{"env_seed", r.env_seed},
              {"walk_seed", r.walk_seed},
              {"cp_steps", r.checkpoint_steps},
              {"cp_pos", r.checkpoint_pos},
              {"cp_max_abs", r.checkpoint_max_abs},
              {"cp_returns", r.checkpoint_returns},
              {"levels", r.levels},
              {"hit_time", r.hit_time},
              {"left_at_hit", r.left_at_hit},
              {"steps_taken", r.steps_taken},
              {"final_pos", r.final_pos},
              {"max_pos", r.max_pos},
              {"min_pos", r.min_pos},
              {"max_abs", r.max_abs},
              {"left_steps", r.left_steps},
              {"returns", r.returns}};
}

TrajectoryRecord record_from_json(const json& j) {
  TrajectoryRecord r;
  j.at("env_seed").get_to(r.env_seed);
  j.at("walk_seed").get_to(r.walk_seed);
  j.at("cp_steps").get_to(r.checkpoint_steps);
  j.at("cp_pos").get_to(r.checkpoint_pos);
  j.at("cp_max_abs").get_to(r.checkpoint_max_abs);
  j.at("cp_returns").get_to(r.checkpoint_returns);
  j.at("levels").get_to(r.levels);
  j.at("hit_time").get_to(r.hit_time);
  j.at("left_at_hit").get_to(r.left_at_hit);
  j.at("steps_taken").get_to(r.steps_taken);
  j.at("final_pos").get_to(r.final_pos);
  j.at("max_pos").get_to(r.max_pos);
  j.at("min_pos").get_to(r.min_pos);
  j.at("max_abs").get_to(r.max_abs);
  j.at("left_steps").get_to(r.left_steps);
  j.at("returns").get_to(r.returns);
  return r;
}

json fingerprint(const EnvironmentLaw& law, const EnsembleSpec& spec) {
  return json{{"law", describe(law)},
              {"n_env", spec.n_env},
              {"n_walks", spec.n_walks},
              {"steps", spec.walk.steps},
              {"checkpoints", spec.walk.checkpoints},
              {"levels", spec.walk.levels},
              {"stop_at_last_level", spec.walk.stop_at_last_level},
              {"base_seed", spec.base_seed}};
}

double frac(int64_t k, int64_t n) { return n > 0 ? static_cast<double>(k) / static_cast<double>(n) : 0.0; }

}  // namespace

uint64_t env_seed_for(uint64_t base_seed, uint64_t env_index) {
  return derive_seed(base_seed, env_index, 0, static_cast<uint64_t>(Stream::Site));
}

uint64_t walk_seed_for(uint64_t base_seed, uint64_t env_index, uint64_t walk_index) {
  return derive_seed(base_seed, env_index, walk_index + 1, static_cast<uint64_t>(Stream::Walk));
}

std::vector<int64_t> geometric_checkpoints(int64_t n, int per_decade) {
  std::vector<int64_t> out;
  if (n <= 0) return out;
  for (int k = 0;; ++k) {
    const auto c = static_cast<int64_t>(std::llround(std::pow(10.0, static_cast<double>(k) / per_decade)));
    if (c >= n) break;
    if (out.empty() || c > out.back()) out.push_back(c);
  }
  out.push_back(n);
  return out;
}

std::vector<double> EnsembleResult::positions_at(size_t c) const {
  std::vector<double> v;
  v.reserve(records.size());
  for (const auto& r : records)
    if (c < r.checkpoint_pos.size()) v.push_back(static_cast<double>(r.checkpoint_pos[c]));
  return v;
}

std::vector<double> EnsembleResult::hit_times(size_t level_index) const {
  std::vector<double> v;
  v.reserve(records.size());
  for (const auto& r : records) {
    const int64_t h = r.hit_time.at(level_index);
    v.push_back(h < 0 ? std::numeric_limits<double>::infinity() : static_cast<double>(h));
  }
  return v;
}

EnsembleResult summarize(const std::string& law, const EnsembleSpec& spec,
                         std::vector<TrajectoryRecord> records) {
  EnsembleResult res;
  res.law = law;
  res.n_env = spec.n_env;
  res.n_walks = spec.n_walks;
  res.base_seed = spec.base_seed;
  res.checkpoints = spec.walk.checkpoints;
  res.records = std::move(records);
  for (size_t c = 0; c < res.checkpoints.size(); ++c) {
    CheckpointStats s;
    s.step = res.checkpoints[c];
    std::vector<double> x;
    double max_abs = 0, returns = 0;
    int64_t neg = 0, zero = 0, pos = 0;
    for (const auto& r : res.records) {
      if (c >= r.checkpoint_pos.size()) continue;
      const int64_t p = r.checkpoint_pos[c];
      x.push_back(static_cast<double>(p));
      neg += p < 0;
      zero += p == 0;
      pos += p > 0;
      max_abs += static_cast<double>(r.checkpoint_max_abs[c]);
      returns += static_cast<double>(r.checkpoint_returns[c]);
    }
    s.count = static_cast<int64_t>(x.size());
    if (s.count > 0) {
      double sum = 0;
      for (double v : x) sum += v;
      s.mean = sum / static_cast<double>(s.count);
      double ss = 0;
      for (double v : x) ss += (v - s.mean) * (v - s.mean);
      s.var = s.count > 1 ? ss / static_cast<double>(s.count - 1) : 0.0;
      std::sort(x.begin(), x.end());
      s.q05 = quantile_sorted(x, 0.05);
      s.q25 = quantile_sorted(x, 0.25);
      s.q50 = quantile_sorted(x, 0.50);
      s.q75 = quantile_sorted(x, 0.75);
      s.q95 = quantile_sorted(x, 0.95);
      s.frac_neg = frac(neg, s.count);
      s.frac_zero = frac(zero, s.count);
      s.frac_pos = frac(pos, s.count);
      s.mean_max_abs = max_abs / static_cast<double>(s.count);
      s.mean_returns = returns / static_cast<double>(s.count);
    }
    res.stats.push_back(s);
  }
  for (size_t l = 0; l < spec.walk.levels.size(); ++l) {
    LevelStats s;
    s.level = spec.walk.levels[l];
    std::vector<double> t = res.hit_times(l);
    s.count = static_cast<int64_t>(t.size());
    for (double v : t) s.hits += std::isfinite(v);
    std::sort(t.begin(), t.end());
    if (!t.empty()) {
      s.q25 = quantile_sorted(t, 0.25);
      s.median = quantile_sorted(t, 0.5);
      s.q75 = quantile_sorted(t, 0.75);
    }
    res.level_stats.push_back(s);
  }
  return res;
}

EnsembleResult run_ensemble(const EnvironmentLaw& law, const EnsembleSpec& spec) {
  check_law(law);
  if (spec.n_env <= 0 || spec.n_walks <= 0) throw DomainError("ensemble: budgets must be positive");
  const int64_t total = spec.n_env * spec.n_walks;
  const int64_t batches = (total + kBatch - 1) / kBatch;
  std::vector<TrajectoryRecord> records(static_cast<size_t>(total));
  const json fp = fingerprint(law, spec);

  int64_t start = 0;
  if (!spec.partial_path.empty() && std::filesystem::exists(spec.partial_path)) {
    std::ifstream in(spec.partial_path);
    const json j = json::parse(in);
    if (j.at("fingerprint") != fp)
      throw DomainError("ensemble: partial file " + spec.partial_path + " belongs to another run");
    const auto& recs = j.at("records");
    for (size_t i = 0; i < recs.size(); ++i) records[i] = record_from_json(recs[i]);
    start = static_cast<int64_t>(recs.size()) / kBatch;
  }
  int64_t end = batches;
  if (spec.max_pairs > 0) end = std::min(batches, start + (spec.max_pairs + kBatch - 1) / kBatch);

  auto shared = std::make_shared<const EnvironmentLaw>(law);
  parallel_for(end - start, spec.threads, [&](int64_t i) {
    const int64_t b = start + i;
    const int64_t p0 = b * kBatch;
    const int64_t p1 = std::min(total, p0 + kBatch);
    std::map<int64_t, std::unique_ptr<Environment>> envs;
    std::vector<Environment*> env_ptrs;
    std::vector<uint64_t> seeds;
    for (int64_t p = p0; p < p1; ++p) {
      const int64_t e = p / spec.n_walks;
      const int64_t w = p % spec.n_walks;
      auto& slot = envs[e];
      if (!slot) slot = std::make_unique<Environment>(shared, env_seed_for(spec.base_seed, static_cast<uint64_t>(e)));
      env_ptrs.push_back(slot.get());
      seeds.push_back(walk_seed_for(spec.base_seed, static_cast<uint64_t>(e), static_cast<uint64_t>(w)));
    }
    auto out = run_walks(env_ptrs, seeds, spec.walk);
    for (int64_t p = p0; p < p1; ++p) records[static_cast<size_t>(p)] = std::move(out[static_cast<size_t>(p - p0)]);
  });

  if (end < batches) {
    if (!spec.partial_path.empty()) {
      json recs = json::array();
      for (int64_t p = 0; p < end * kBatch; ++p) recs.push_back(record_to_json(records[static_cast<size_t>(p)]));
      const std::string tmp = spec.partial_path + ".tmp";
      {
        std::ofstream out(tmp);
        out << json{{"fingerprint", fp}, {"records", recs}}.dump() << '\n';
      }
      std::filesystem::rename(tmp, spec.partial_path);
    }
    throw BudgetExhausted("ensemble: pair budget exhausted after " + std::to_string(end * kBatch) +
                          " of " + std::to_string(total) + " pairs");
  }
  if (!spec.partial_path.empty()) std::filesystem::remove(spec.partial_path);
  EnsembleResult res = summarize(law_name(law), spec, std::move(records));
  if (!spec.keep_records) res.records.clear();
  return res;
}

namespace {

// Runs several bounded-jump walks in lockstep; each walk keeps its own
// environment, counter stream and records.
std::vector<JumpRecord> jump_batch(const std::vector<Environment*>& envs, const std::vector<uint64_t>& seeds,
                                   const WalkSpec& spec) {
  constexpr int64_t kChunk = 256;
  const size_t K = envs.size();
  const auto* law = std::get_if<BoundedJump>(&envs[0]->law());
  if (!law) throw DomainError("run_bounded_jump requires a bounded-jump law");
  if (spec.steps < 0) throw DomainError("walk: negative step budget");
  const int64_t L = law->L, R = law->R;
  const size_t W = static_cast<size_t>(L + R + 1);
  std::vector<uint32_t> table;
  for (const auto& atom : law->atoms) {
    double cum = 0.0;
    for (size_t j = 0; j < W; ++j) {
      cum += atom.probs[W - 1 - j];
      table.push_back(j + 1 == W ? 0xFFFFFFFFu : step_threshold(cum));
    }
  }
  struct State {
    PhiloxKey key;
    PhiloxBlock w{};
    const int32_t* atoms = nullptr;
    int64_t lo = 0, x = 0, mx = 0, mn = 0, max_step = 0;
    size_t cp = 0;
  };
  std::vector<State> st(K);
  std::vector<JumpRecord> out(K);
  for (size_t i = 0; i < K; ++i) {
    st[i].key = key_from_seed(seeds[i]);
    out[i].walk_seed = seeds[i];
    if (spec.record_path) out[i].path.push_back(0);
  }
  const uint32_t* tab = table.data();
  for (int64_t t0 = 0; t0 < spec.steps; t0 += kChunk) {
    const int64_t t1 = std::min(spec.steps, t0 + kChunk);
    for (size_t i = 0; i < K; ++i) {
      Environment& env = *envs[i];
      env.ensure(st[i].x - kChunk * L - 1, st[i].x + kChunk * R + 1);
      if (env.hi() - env.lo() > spec.max_window_sites)
        throw BudgetExhausted("walk: environment window exceeds the site budget");
    }
    for (size_t i = 0; i < K; ++i) {
      st[i].atoms = envs[i]->atom_data();
      st[i].lo = envs[i]->lo();
    }
    for (int64_t t = t0; t < t1; ++t) {
      for (size_t i = 0; i < K; ++i) {
        State& s = st[i];
        if ((t & 3) == 0) s.w = philox4x32(make_counter(static_cast<uint64_t>(t) >> 2, Stream::Walk), s.key);
        const uint32_t u = s.w[t & 3];
        const uint32_t* thr = tab + static_cast<size_t>(s.atoms[s.x - s.lo]) * W;
        size_t j = 0;
        for (size_t k = 0; k + 1 < W; ++k) j += u > thr[k];
        const int64_t jump = R - static_cast<int64_t>(j);
        s.x += jump;
        s.max_step = std::max(s.max_step, jump < 0 ? -jump : jump);
        s.mx = std::max(s.mx, s.x);
        s.mn = std::min(s.mn, s.x);
      }
      if (spec.record_path)
        for (size_t i = 0; i < K; ++i) out[i].path.push_back(st[i].x);
      if (st[0].cp < spec.checkpoints.size() && t + 1 == spec.checkpoints[st[0].cp])
        for (size_t i = 0; i < K; ++i) {
          out[i].checkpoint_steps.push_back(t + 1);
          out[i].checkpoint_pos.push_back(st[i].x);
          ++st[i].cp;
        }
    }
  }
  for (size_t i = 0; i < K; ++i) {
    out[i].final_pos = st[i].x;
    out[i].max_pos = st[i].mx;
    out[i].min_pos = st[i].mn;
    out[i].max_step = st[i].max_step;
  }
  return out;
}

}  // namespace

JumpRecord run_bounded_jump(Environment& env, const WalkSpec& spec, uint64_t walk_seed) {
  return std::move(jump_batch({&env}, {walk_seed}, spec)[0]);
}

std::vector<JumpRecord> run_bounded_jump_ensemble(const EnvironmentLaw& law, int64_t n_env,
                                                  int64_t n_walks, const WalkSpec& spec,
                                                  uint64_t base_seed, int threads) {
  check_law(law);
  if (!std::holds_alternative<BoundedJump>(law)) throw DomainError("run_bounded_jump requires a bounded-jump law");
  constexpr int64_t kBatch = 8;
  const int64_t total = n_env * n_walks;
  auto shared = std::make_shared<const EnvironmentLaw>(law);
  std::vector<JumpRecord> out(static_cast<size_t>(total));
  parallel_for((total + kBatch - 1) / kBatch, threads, [&](int64_t b) {
    const int64_t p0 = b * kBatch, p1 = std::min(total, p0 + kBatch);
    std::map<int64_t, std::unique_ptr<Environment>> envs;
    std::vector<Environment*> ptrs;
    std::vector<uint64_t> seeds;
    for (int64_t p = p0; p < p1; ++p) {
      const int64_t e = p / n_walks, w = p % n_walks;
      auto& slot = envs[e];
      if (!slot) slot = std::make_unique<Environment>(shared, env_seed_for(base_seed, static_cast<uint64_t>(e)));
      ptrs.push_back(slot.get());
      seeds.push_back(walk_seed_for(base_seed, static_cast<uint64_t>(e), static_cast<uint64_t>(w)));
    }
    auto recs = jump_batch(ptrs, seeds, spec);
    for (int64_t p = p0; p < p1; ++p) out[static_cast<size_t>(p)] = std::move(recs[static_cast<size_t>(p - p0)]);
  });
  return out;
}

CtrwRecord run_ctrw(Environment& env, double t_max, uint64_t walk_seed,
                    const std::vector<double>& times, uint64_t max_events,
                    const std::vector<double>& laplace_s) {
  if (env.model() != SiteModel::Bond) throw DomainError("run_ctrw requires a rate law");
  if (!(t_max > 0)) throw DomainError("run_ctrw: t_max must be positive");
  for (size_t i = 0; i < times.size(); ++i)
    if (times[i] < 0 || times[i] > t_max || (i > 0 && times[i] < times[i - 1]))
      throw DomainError("run_ctrw: times must be sorted within [0, t_max]");
  CtrwRecord r;
  r.walk_seed = walk_seed;
  r.times = times;
  r.pos.resize(times.size());
  r.laplace_occupation.assign(laplace_s.size(), 0.0);
  CounterRng rng(walk_seed, Stream::Ctrw);
  double t = 0;
  int64_t x = 0;
  size_t k = 0;
  for (;;) {
    const double cl = env.bond(x - 1);
    const double cr = env.bond(x);
    const double c = cl + cr;
    const double dt = -std::log(rng.uniform_pos()) / c;
    const double u = rng.uniform();
    while (k < times.size() && times[k] < t + dt) r.pos[k++] = x;
    if (x == 0)
      for (size_t j = 0; j < laplace_s.size(); ++j) {
        const double sj = laplace_s[j];
        const double end = std::min(t + dt, t_max);
        r.laplace_occupation[j] += std::exp(-sj * t) * -std::expm1(-sj * (end - t)) / sj;
      }
    if (t + dt >= t_max) break;
    t += dt;
    x += u * c < cr ? 1 : -1;
    if (++r.events >= max_events) throw BudgetExhausted("run_ctrw: event budget exhausted");
  }
  r.final_pos = x;
  r.final_time = t_max;
  return r;
}

CtrwEnsemble run_ctrw_ensemble(const EnvironmentLaw& law, int64_t n_env, int64_t n_walks,
                               const std::vector<double>& times, uint64_t base_seed, int threads,
                               const std::vector<double>& laplace_s) {
  check_law(law);
  if (times.empty()) throw DomainError("run_ctrw_ensemble: no observation times");
  auto shared = std::make_shared<const EnvironmentLaw>(law);
  CtrwEnsemble res;
  res.times = times;
  res.records.resize(static_cast<size_t>(n_env * n_walks));
  parallel_for(n_env, threads, [&](int64_t e) {
    Environment env(shared, env_seed_for(base_seed, static_cast<uint64_t>(e)));
    for (int64_t w = 0; w < n_walks; ++w)
      res.records[static_cast<size_t>(e * n_walks + w)] =
          run_ctrw(env, times.back(), walk_seed_for(base_seed, static_cast<uint64_t>(e), static_cast<uint64_t>(w)), times,
                   1000000000ull, laplace_s);
  });
  const size_t m = times.size();
  res.mean_x.assign(m, 0.0);
  res.mean_x2.assign(m, 0.0);
  res.p00.assign(m, 0.0);
  for (const auto& r : res.records)
    for (size_t i = 0; i < m; ++i) {
      const auto x = static_cast<double>(r.pos[i]);
      res.mean_x[i] += x;
      res.mean_x2[i] += x * x;
      res.p00[i] += r.pos[i] == 0;
    }
  const auto n = static_cast<double>(res.records.size());
  for (size_t i = 0; i < m; ++i) {
    res.mean_x[i] /= n;
    res.mean_x2[i] /= n;
    res.p00[i] /= n;
  }
  res.laplace_s = laplace_s;
  res.laplace_p00.assign(laplace_s.size(), 0.0);
  for (const auto& r : res.records)
    for (size_t j = 0; j < laplace_s.size(); ++j) res.laplace_p00[j] += r.laplace_occupation[j] / n;
  return res;
}

BalancedRecord run_balanced(const Balanced& law, uint64_t env_seed, uint64_t walk_seed,
                            int64_t steps, const std::vector<int64_t>& checkpoints) {
  check_law(EnvironmentLaw{law});
  const int d = law.dim;
  if (d < 2 || d > 3) throw DomainError("run_balanced: dimension must be 2 or 3");
  std::vector<double> cdf;
  std::vector<std::vector<double>> dir_cdf;
  double acc = 0;
  for (const auto& a : law.atoms) {
    acc += a.weight;
    cdf.push_back(acc);
    std::vector<double> dc;
    double s = 0;
    for (int i = 0; i < d; ++i) {
      s += a.axis[static_cast<size_t>(i)];
      dc.push_back(s);
      s += a.axis[static_cast<size_t>(i)];
      dc.push_back(s);
    }
    dc.back() = std::numeric_limits<double>::infinity();
    dir_cdf.push_back(std::move(dc));
  }
  cdf.back() = std::numeric_limits<double>::infinity();
  const PhiloxKey env_key = key_from_seed(env_seed);
  auto atom_at = [&](const std::array<int64_t, 3>& x) {
    const PhiloxCounter c{static_cast<uint32_t>(x[0]), static_cast<uint32_t>(x[1]),
                          static_cast<uint32_t>(x[2]), static_cast<uint32_t>(Stream::Balanced)};
    const auto w = philox4x32(c, env_key);
    const double u = unit_closed_open(w[0], w[1]);
    return static_cast<size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
  };

  BalancedRecord r;
  r.dim = d;
  CounterRng rng(walk_seed, Stream::Balanced);
  std::array<int64_t, 3> x{0, 0, 0};
  std::array<double, 3> qv{0, 0, 0};
  int64_t returns = 0;
  size_t cp = 0;
  for (int64_t t = 0; t < steps; ++t) {
    const size_t a = atom_at(x);
    const auto& axis = law.atoms[a].axis;
    for (int i = 0; i < d; ++i) qv[static_cast<size_t>(i)] += axis[static_cast<size_t>(i)];
    const double u = rng.uniform();
    const auto& dc = dir_cdf[a];
    const auto k = static_cast<size_t>(std::upper_bound(dc.begin(), dc.end(), u) - dc.begin());
    x[k / 2] += (k % 2 == 0) ? 1 : -1;
    returns += x[0] == 0 && x[1] == 0 && x[2] == 0;
    if (cp < checkpoints.size() && t + 1 == checkpoints[cp]) {
      r.checkpoint_steps.push_back(t + 1);
      r.pos.push_back(x);
      r.returns.push_back(returns);
      r.qv.push_back(qv);
      ++cp;
    }
  }
  return r;
}

std::vector<BalancedRecord> run_balanced_ensemble(const Balanced& law, int64_t n_env,
                                                  int64_t n_walks, int64_t steps,
                                                  const std::vector<int64_t>& checkpoints,
                                                  uint64_t base_seed, int threads) {
  std::vector<BalancedRecord> out(static_cast<size_t>(n_env * n_walks));
  parallel_for(n_env * n_walks, threads, [&](int64_t p) {
    const auto e = static_cast<uint64_t>(p / n_walks);
    const auto w = static_cast<uint64_t>(p % n_walks);
    out[static_cast<size_t>(p)] =
        run_balanced(law, env_seed_for(base_seed, e), walk_seed_for(base_seed, e, w), steps, checkpoints);
  });
  return out;
}

std::vector<int64_t> regeneration_diagnostic(const std::vector<int64_t>& path) {
  std::vector<int64_t> out;
  const size_t n = path.size();
  if (n < 2) return out;
  std::vector<int64_t> suffix_min(n);
  suffix_min[n - 1] = std::numeric_limits<int64_t>::max();
  for (size_t t = n - 1; t-- > 0;) suffix_min[t] = std::min(suffix_min[t + 1], path[t + 1]);
  int64_t prefix_max = path[0];
  for (size_t t = 1; t < n; ++t) {
    if (path[t] > prefix_max && suffix_min[t] >= path[t]) out.push_back(static_cast<int64_t>(t));
    prefix_max = std::max(prefix_max, path[t]);
  }
  return out;
}

}  // namespace rwre
