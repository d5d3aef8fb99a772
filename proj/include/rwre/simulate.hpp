#pragma once
// Quenched walk engines and annealed ensembles.
//
// Every walk is keyed by a 64-bit walk seed; step t of a nearest-neighbour
// walk uses word t%4 of Philox(counter = t/4, key = walk seed). Ensembles
// derive environment and walk seeds from (base seed, env index, walk index),
// so results do not depend on thread count or scheduling.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rwre/envgen.hpp"

namespace rwre {

uint64_t env_seed_for(uint64_t base_seed, uint64_t env_index);
uint64_t walk_seed_for(uint64_t base_seed, uint64_t env_index, uint64_t walk_index);

/// Geometric checkpoint grid: round(10^{k/per_decade}) for k >= 0, deduplicated,
/// capped at n (n itself is always included).
std::vector<int64_t> geometric_checkpoints(int64_t n, int per_decade = 8);

struct WalkSpec {
  int64_t steps = 0;
  std::vector<int64_t> checkpoints;  ///< sorted step counts in (0, steps]
  std::vector<int64_t> levels;       ///< sorted positive hitting levels
  bool stop_at_last_level = false;   ///< stop a walk once it hits levels.back()
  bool record_path = false;          ///< keep X_0..X_n (run_walk only)
  int64_t max_window_sites = int64_t{1} << 28;
};

struct TrajectoryRecord {
  uint64_t env_seed = 0;
  uint64_t walk_seed = 0;
  std::vector<int64_t> checkpoint_steps;   ///< checkpoints actually reached
  std::vector<int64_t> checkpoint_pos;
  std::vector<int64_t> checkpoint_max_abs; ///< max_{k <= t} |X_k|
  std::vector<int64_t> checkpoint_returns; ///< visits to 0 at times 1..t
  std::vector<int64_t> levels;
  std::vector<int64_t> hit_time;           ///< T_n, or -1 when not reached
  std::vector<int64_t> left_at_hit;        ///< left steps before T_n
  int64_t steps_taken = 0;
  int64_t final_pos = 0;
  int64_t max_pos = 0;
  int64_t min_pos = 0;
  int64_t max_abs = 0;
  int64_t left_steps = 0;
  int64_t returns = 0;
  std::vector<int64_t> path;               ///< X_0..X_n when requested
};

/// One nearest-neighbour walk (site or bond law) from X_0 = 0.
TrajectoryRecord run_walk(Environment& env, const WalkSpec& spec, uint64_t walk_seed);

/// Walks several (environment, seed) pairs together through the batched
/// kernel. Environments may repeat.
std::vector<TrajectoryRecord> run_walks(const std::vector<Environment*>& envs,
                                        const std::vector<uint64_t>& walk_seeds,
                                        const WalkSpec& spec);

struct EnsembleSpec {
  int64_t n_env = 1;
  int64_t n_walks = 1;
  WalkSpec walk;
  uint64_t base_seed = 1;
  int threads = 0;                 ///< 0 = default_threads()
  bool keep_records = true;
  int64_t max_pairs = 0;           ///< budget of (env, walk) pairs for this call; 0 = all
  std::string partial_path;        ///< resumable partial file (empty = none)
};

struct CheckpointStats {
  int64_t step = 0;
  int64_t count = 0;
  double mean = 0, var = 0;
  double q05 = 0, q25 = 0, q50 = 0, q75 = 0, q95 = 0;
  double frac_neg = 0, frac_zero = 0, frac_pos = 0;
  double mean_max_abs = 0;
  double mean_returns = 0;
};

struct LevelStats {
  int64_t level = 0;
  int64_t hits = 0;
  int64_t count = 0;
  double q25 = 0, median = 0, q75 = 0;  ///< +inf when not enough walks hit
};

struct EnsembleResult {
  std::string law;
  int64_t n_env = 0;
  int64_t n_walks = 0;
  uint64_t base_seed = 0;
  std::vector<int64_t> checkpoints;
  std::vector<CheckpointStats> stats;
  std::vector<LevelStats> level_stats;
  std::vector<TrajectoryRecord> records;  ///< pair order env-major when kept

  /// Position of every pair at checkpoint index c.
  std::vector<double> positions_at(size_t c) const;
  std::vector<double> hit_times(size_t level_index) const;
};

/// Annealed ensemble of nearest-neighbour walks. Throws BudgetExhausted after
/// writing spec.partial_path when spec.max_pairs stops the run early; calling
/// again with the same spec resumes from that file.
EnsembleResult run_ensemble(const EnvironmentLaw& law, const EnsembleSpec& spec);

/// Summaries from complete per-pair records.
EnsembleResult summarize(const std::string& law, const EnsembleSpec& spec,
                         std::vector<TrajectoryRecord> records);

struct JumpRecord {
  uint64_t walk_seed = 0;
  std::vector<int64_t> checkpoint_steps;
  std::vector<int64_t> checkpoint_pos;
  int64_t final_pos = 0;
  int64_t max_pos = 0;
  int64_t min_pos = 0;
  int64_t max_step = 0;  ///< largest |X_{t+1} - X_t|
  std::vector<int64_t> path;
};

/// Bounded-jump walk. With L = R = 1 the trajectory is bit-identical to
/// run_walk on the matching nearest-neighbour law.
JumpRecord run_bounded_jump(Environment& env, const WalkSpec& spec, uint64_t walk_seed);

std::vector<JumpRecord> run_bounded_jump_ensemble(const EnvironmentLaw& law, int64_t n_env,
                                                  int64_t n_walks, const WalkSpec& spec,
                                                  uint64_t base_seed, int threads = 0);

struct CtrwRecord {
  uint64_t walk_seed = 0;
  std::vector<double> times;
  std::vector<int64_t> pos;     ///< X_t at each time
  int64_t final_pos = 0;
  double final_time = 0;
  uint64_t events = 0;
  std::vector<double> laplace_occupation;  ///< int_0^t_max e^{-st} 1{X_t = 0} dt per requested s
};

/// Continuous-time walk with symmetric rates c_{x,x+1}: exponential sojourn
/// with rate c_{x,x-1} + c_{x,x+1}, then a jump right w.p. c_{x,x+1}/c_x.
CtrwRecord run_ctrw(Environment& env, double t_max, uint64_t walk_seed,
                    const std::vector<double>& times, uint64_t max_events = 1000000000ull,
                    const std::vector<double>& laplace_s = {});

struct CtrwEnsemble {
  std::vector<double> times;
  std::vector<double> mean_x, mean_x2, p00;
  std::vector<double> laplace_s, laplace_p00;  ///< mean occupation integrals
  std::vector<CtrwRecord> records;
};

CtrwEnsemble run_ctrw_ensemble(const EnvironmentLaw& law, int64_t n_env, int64_t n_walks,
                               const std::vector<double>& times, uint64_t base_seed,
                               int threads = 0, const std::vector<double>& laplace_s = {});

struct BalancedRecord {
  int dim = 0;
  std::vector<int64_t> checkpoint_steps;
  std::vector<std::array<int64_t, 3>> pos;
  std::vector<int64_t> returns;               ///< visits to the origin up to the checkpoint
  std::vector<std::array<double, 3>> qv;      ///< sum over k < t of p_{X_k}(e_i)
};

/// Balanced walk on Z^d (d = 2 or 3) in the environment drawn from
/// (law, env_seed); site x picks its atom by Philox keyed on env_seed.
BalancedRecord run_balanced(const Balanced& law, uint64_t env_seed, uint64_t walk_seed,
                            int64_t steps, const std::vector<int64_t>& checkpoints);

std::vector<BalancedRecord> run_balanced_ensemble(const Balanced& law, int64_t n_env,
                                                  int64_t n_walks, int64_t steps,
                                                  const std::vector<int64_t>& checkpoints,
                                                  uint64_t base_seed, int threads = 0);

/// Times t >= 1 with X_t > X_s for all s < t and X_u >= X_t for all u > t
/// within the recorded path.
std::vector<int64_t> regeneration_diagnostic(const std::vector<int64_t>& path);

}  // namespace rwre
