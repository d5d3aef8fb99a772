#include <algorithm>
#include <climits>
#include <cmath>

#include "kernels/walk_kernel.hpp"
#include "rwre/error.hpp"
#include "rwre/simulate.hpp"

namespace rwre {
namespace {

using kernels::Batch;
using kernels::kLanes;
using kernels::kMaxChunk;

const uint32_t kDummyThreshold[1] = {0};

void check_spec(const WalkSpec& spec) {
  if (spec.steps < 0) throw DomainError("walk: negative step budget");
  int64_t prev = 0;
  for (int64_t c : spec.checkpoints) {
    if (c <= prev || c > spec.steps)
      throw DomainError("walk: checkpoints must be increasing within (0, steps]");
    prev = c;
  }
  prev = 0;
  for (int64_t l : spec.levels) {
    if (l <= 0 || l < prev) throw DomainError("walk: levels must be positive and sorted");
    prev = l;
  }
}

void check_model(const Environment& env) {
  if (env.model() != SiteModel::NearestNeighbor && env.model() != SiteModel::Bond)
    throw DomainError("nearest-neighbour walk requires a site or bond law");
}

struct LaneCtl {
  Environment* env = nullptr;
  TrajectoryRecord* rec = nullptr;
  PhiloxKey key{};
  int64_t pos = 0, max_pos = 0, min_pos = 0, rights = 0, returns = 0;
  size_t next_level = 0;
  bool done = false;
};

void finish(LaneCtl& c, int64_t t) {
  TrajectoryRecord& r = *c.rec;
  r.steps_taken = t;
  r.final_pos = c.pos;
  r.max_pos = c.max_pos;
  r.min_pos = c.min_pos;
  r.max_abs = std::max(c.max_pos, -c.min_pos);
  r.left_steps = t - c.rights;
  r.returns = c.returns;
}

// Re-walks one chunk lane by lane to locate level hits exactly.
void replay(LaneCtl& c, const WalkSpec& spec, uint64_t t0, uint64_t t1) {
  Environment& env = *c.env;
  TrajectoryRecord& r = *c.rec;
  int64_t x = c.pos, rights = c.rights, returns = c.returns, mx = c.max_pos, mn = c.min_pos;
  const size_t nl = spec.levels.size();
  for (uint64_t t = t0; t < t1; ++t) {
    const bool right = kernels::step_right(c.key, t, env.threshold(x));
    x += right ? 1 : -1;
    rights += right;
    returns += x == 0;
    mx = std::max(mx, x);
    mn = std::min(mn, x);
    while (c.next_level < nl && x == spec.levels[c.next_level]) {
      r.hit_time[c.next_level] = static_cast<int64_t>(t + 1);
      r.left_at_hit[c.next_level] = static_cast<int64_t>(t + 1) - rights;
      ++c.next_level;
      if (spec.stop_at_last_level && c.next_level == nl) {
        c.pos = x;
        c.rights = rights;
        c.returns = returns;
        c.max_pos = mx;
        c.min_pos = mn;
        c.done = true;
        finish(c, static_cast<int64_t>(t + 1));
        return;
      }
    }
  }
}

void run_batch(LaneCtl* ctl, int n, const WalkSpec& spec, kernels::ChunkFn kernel) {
  Batch batch{};
  for (auto& ln : batch.lane) ln.thr = kDummyThreshold;
  for (int i = 0; i < n; ++i) batch.lane[i].key = ctl[i].key;

  size_t cp = 0;
  int64_t t = 0;
  while (t < spec.steps) {
    bool any = false;
    for (int i = 0; i < n; ++i) any |= !ctl[i].done;
    if (!any) break;
    int64_t t_end = std::min(spec.steps, t + kMaxChunk);
    if (cp < spec.checkpoints.size()) t_end = std::min(t_end, spec.checkpoints[cp]);
    const int64_t len = t_end - t;

    for (int i = 0; i < n; ++i) {
      if (ctl[i].done) continue;
      Environment& env = *ctl[i].env;
      env.ensure(ctl[i].pos - len - 1, ctl[i].pos + len + 1);
      if (env.hi() - env.lo() > spec.max_window_sites)
        throw BudgetExhausted("walk: environment window exceeds the site budget");
    }
    for (int i = 0; i < n; ++i) {
      kernels::Lane& ln = batch.lane[i];
      const LaneCtl& c = ctl[i];
      ln.active = c.done ? 0u : 1u;
      if (c.done) {
        ln.thr = kDummyThreshold;
        ln.off = 0;
        continue;
      }
      ln.thr = c.env->threshold_data() + (c.pos - c.env->lo());
      ln.off = 0;
      ln.relmax = 0;
      ln.relmin = 0;
      ln.origin = std::abs(c.pos) < (int64_t{1} << 30) ? static_cast<int32_t>(-c.pos) : INT32_MAX;
      ln.rights = 0;
      ln.returns = 0;
    }

    kernel(batch, static_cast<uint64_t>(t), static_cast<uint64_t>(t_end));

    for (int i = 0; i < n; ++i) {
      LaneCtl& c = ctl[i];
      if (c.done) continue;
      const kernels::Lane& ln = batch.lane[i];
      if (c.next_level < spec.levels.size() && c.pos + ln.relmax >= spec.levels[c.next_level]) {
        replay(c, spec, static_cast<uint64_t>(t), static_cast<uint64_t>(t_end));
        if (c.done) continue;
      }
      c.max_pos = std::max(c.max_pos, c.pos + ln.relmax);
      c.min_pos = std::min(c.min_pos, c.pos + ln.relmin);
      c.pos += ln.off;
      c.rights += ln.rights;
      c.returns += ln.returns;
    }
    t = t_end;

    if (cp < spec.checkpoints.size() && t == spec.checkpoints[cp]) {
      for (int i = 0; i < n; ++i) {
        LaneCtl& c = ctl[i];
        if (c.done) continue;
        TrajectoryRecord& r = *c.rec;
        r.checkpoint_steps.push_back(t);
        r.checkpoint_pos.push_back(c.pos);
        r.checkpoint_max_abs.push_back(std::max(c.max_pos, -c.min_pos));
        r.checkpoint_returns.push_back(c.returns);
      }
      ++cp;
    }
  }
  for (int i = 0; i < n; ++i)
    if (!ctl[i].done) finish(ctl[i], t);
}

TrajectoryRecord blank_record(const Environment& env, uint64_t walk_seed, const WalkSpec& spec) {
  TrajectoryRecord r;
  r.env_seed = env.seed();
  r.walk_seed = walk_seed;
  r.levels = spec.levels;
  r.hit_time.assign(spec.levels.size(), -1);
  r.left_at_hit.assign(spec.levels.size(), -1);
  r.checkpoint_steps.reserve(spec.checkpoints.size());
  r.checkpoint_pos.reserve(spec.checkpoints.size());
  r.checkpoint_max_abs.reserve(spec.checkpoints.size());
  r.checkpoint_returns.reserve(spec.checkpoints.size());
  return r;
}

// Step-by-step reference used when the full path is requested.
TrajectoryRecord walk_with_path(Environment& env, const WalkSpec& spec, uint64_t walk_seed) {
  TrajectoryRecord r = blank_record(env, walk_seed, spec);
  const PhiloxKey key = key_from_seed(walk_seed);
  r.path.reserve(static_cast<size_t>(spec.steps + 1));
  r.path.push_back(0);
  int64_t x = 0, rights = 0, returns = 0, mx = 0, mn = 0;
  size_t cp = 0, lvl = 0;
  int64_t t = 0;
  for (; t < spec.steps; ++t) {
    if ((t & (kMaxChunk - 1)) == 0) {
      env.ensure(x - kMaxChunk - 1, x + kMaxChunk + 1);
      if (env.hi() - env.lo() > spec.max_window_sites)
        throw BudgetExhausted("walk: environment window exceeds the site budget");
    }
    const bool right = kernels::step_right(key, static_cast<uint64_t>(t), env.threshold(x));
    x += right ? 1 : -1;
    rights += right;
    returns += x == 0;
    mx = std::max(mx, x);
    mn = std::min(mn, x);
    r.path.push_back(x);
    bool stop = false;
    while (lvl < spec.levels.size() && x == spec.levels[lvl]) {
      r.hit_time[lvl] = t + 1;
      r.left_at_hit[lvl] = t + 1 - rights;
      ++lvl;
      stop = spec.stop_at_last_level && lvl == spec.levels.size();
    }
    if (!stop && cp < spec.checkpoints.size() && t + 1 == spec.checkpoints[cp]) {
      r.checkpoint_steps.push_back(t + 1);
      r.checkpoint_pos.push_back(x);
      r.checkpoint_max_abs.push_back(std::max(mx, -mn));
      r.checkpoint_returns.push_back(returns);
      ++cp;
    }
    if (stop) {
      ++t;
      break;
    }
  }
  r.steps_taken = t;
  r.final_pos = x;
  r.max_pos = mx;
  r.min_pos = mn;
  r.max_abs = std::max(mx, -mn);
  r.left_steps = t - rights;
  r.returns = returns;
  return r;
}

}  // namespace

std::vector<TrajectoryRecord> run_walks(const std::vector<Environment*>& envs,
                                        const std::vector<uint64_t>& walk_seeds,
                                        const WalkSpec& spec) {
  if (envs.size() != walk_seeds.size()) throw DomainError("run_walks: size mismatch");
  check_spec(spec);
  for (const Environment* e : envs) check_model(*e);
  std::vector<TrajectoryRecord> out;
  out.reserve(envs.size());
  for (size_t i = 0; i < envs.size(); ++i) out.push_back(blank_record(*envs[i], walk_seeds[i], spec));
  const kernels::ChunkFn kernel = kernels::select_chunk_kernel();
  for (size_t b = 0; b < envs.size(); b += kLanes) {
    const int n = static_cast<int>(std::min<size_t>(kLanes, envs.size() - b));
    LaneCtl ctl[kLanes];
    for (int i = 0; i < n; ++i) {
      ctl[i].env = envs[b + static_cast<size_t>(i)];
      ctl[i].rec = &out[b + static_cast<size_t>(i)];
      ctl[i].key = key_from_seed(walk_seeds[b + static_cast<size_t>(i)]);
    }
    run_batch(ctl, n, spec, kernel);
  }
  return out;
}

TrajectoryRecord run_walk(Environment& env, const WalkSpec& spec, uint64_t walk_seed) {
  check_spec(spec);
  check_model(env);
  if (spec.record_path) return walk_with_path(env, spec, walk_seed);
  return std::move(run_walks({&env}, {walk_seed}, spec).front());
}

}  // namespace rwre
