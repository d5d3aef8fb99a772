#pragma once
// Environment laws and reproducible realizations of the random environment.
//
// A realized environment is addressable by signed 64-bit site index. The
// datum at site x is a pure function of (law, seed, x): it is drawn from a
// Philox block keyed by the seed with x as counter, so windows can be grown
// in any order without changing previously realized values.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rwre {

struct SiteAtom {
  double p;       ///< probability of a right step
  double weight;  ///< probability of the atom
};

struct JumpAtom {
  std::vector<double> probs;  ///< probabilities of jumps -L..R (size L+R+1)
  double weight;
};

struct ValueAtom {
  double value;  ///< conductance or rate
  double weight;
};

struct BalancedAtom {
  std::vector<double> axis;  ///< p(e_i) = p(-e_i), i = 1..d; sum = 1/2
  double weight;
};

/// p_x = beta w.p. alpha, 1 - beta w.p. 1 - alpha.
struct TwoPointSites {
  double alpha;
  double beta;
};

/// p_x = 1/(1+rho) w.p. alpha, p_x = 1 (a diode) w.p. 1 - alpha.
struct Diode {
  double alpha;
  double rho;
};

struct DiscreteSites {
  std::vector<SiteAtom> atoms;
};

struct BoundedJump {
  int L;
  int R;
  std::vector<JumpAtom> atoms;
};

/// Symmetric bond conductances c_{x,x+1} driving the discrete-time walk.
struct BondWeights {
  std::vector<ValueAtom> atoms;
};

/// Symmetric transition rates c_{x,x+1} = c_{x+1,x} of the continuous-time walk.
struct Rates {
  std::vector<ValueAtom> atoms;
};

/// Rates with density (1 - a) u^{-a} on (0, 1).
struct RatesPowerLaw {
  double alpha_exponent;
};

/// Balanced nearest-neighbour law on Z^d.
struct Balanced {
  int dim;
  std::vector<BalancedAtom> atoms;
};

using EnvironmentLaw = std::variant<TwoPointSites, Diode, DiscreteSites, BoundedJump,
                                    BondWeights, Rates, RatesPowerLaw, Balanced>;

enum class SiteModel { NearestNeighbor, BoundedJump, Bond, Balanced };

SiteModel site_model(const EnvironmentLaw& law);
std::string law_name(const EnvironmentLaw& law);

/// Canonical one-line text form of a law (17 significant digits).
std::string describe(const EnvironmentLaw& law);

/// Throws InvalidLaw when weights do not sum to 1 (1e-12), probabilities lie
/// outside their range, or a jump vector does not sum to 1.
void check_law(const EnvironmentLaw& law);

/// Nearest-neighbour site law as a list of (p, weight) atoms. Throws
/// DomainError for non-site laws.
std::vector<SiteAtom> site_atoms(const EnvironmentLaw& law);

/// Bond or rate law as (value, weight) atoms; empty for RatesPowerLaw.
std::vector<ValueAtom> value_atoms(const EnvironmentLaw& law);

struct LawReport {
  std::optional<double> ellipticity;  ///< min over atoms of min(p, 1 - p)
  bool ellipticity_violated = false;  ///< some atom has p in {0, 1}
  bool has_diode_atom = false;        ///< atom at p = 1 (ln rho = -inf)
  bool eta_finite = true;
  bool degenerate = false;            ///< P{rho = 1} = 1
  bool arithmetic = false;            ///< finite ln rho values on a lattice
  std::optional<double> lattice_span; ///< span c of the lattice when arithmetic
  std::vector<std::string> notes;
};

/// Report-only inspection; never throws for a law that passes check_law.
LawReport validate(const EnvironmentLaw& law);

/// A realized window of one environment. Not internally synchronized: grow
/// the window before sharing it between threads.
class Environment {
 public:
  static constexpr int64_t kBlock = 4096;

  Environment(std::shared_ptr<const EnvironmentLaw> law, uint64_t seed);
  Environment(const EnvironmentLaw& law, uint64_t seed);

  const EnvironmentLaw& law() const { return *law_; }
  std::shared_ptr<const EnvironmentLaw> law_ptr() const { return law_; }
  SiteModel model() const { return model_; }
  uint64_t seed() const { return seed_; }

  /// Realizes at least the closed site range [a, b], growing in blocks.
  void ensure(int64_t a, int64_t b);
  int64_t lo() const { return lo_; }  ///< first realized site
  int64_t hi() const { return hi_; }  ///< one past the last realized site

  /// Right-step probability at site x (site laws, or the bond-induced
  /// c_{x,x+1} / (c_{x-1,x} + c_{x,x+1}) for bond laws).
  double p(int64_t x);
  /// rho_x = (1 - p_x) / p_x; 0 at a diode.
  double rho(int64_t x);
  double log_rho(int64_t x);
  uint32_t threshold(int64_t x);
  /// c_{x,x+1} for bond and rate laws.
  double bond(int64_t x);
  /// Jump probability vector (index 0 is jump -L) for bounded-jump laws.
  std::span<const double> jump_probs(int64_t x);
  /// Cumulative step thresholds ordered R, R-1, ..., -L.
  std::span<const uint32_t> jump_thresholds(int64_t x);
  /// Index of the law atom drawn at x (-1 for continuous laws).
  int32_t atom(int64_t x);

  /// Base pointer for threshold lookups; valid for x in [lo(), hi()) as
  /// threshold_data()[x - lo()]. Invalidated by ensure().
  const uint32_t* threshold_data() const { return thr_.data(); }
  /// Atom indices for site laws, as atom_data()[x - lo()]. Invalidated by ensure().
  const int32_t* atom_data() const { return atom_.data(); }

 private:
  void realize(int64_t a, int64_t b, std::vector<double>& value, std::vector<int32_t>& atom) const;
  void rebuild_thresholds();
  size_t index(int64_t x) {
    if (x < lo_ || x >= hi_) ensure(x, x);
    return static_cast<size_t>(x - lo_);
  }

  std::shared_ptr<const EnvironmentLaw> law_;
  SiteModel model_;
  uint64_t seed_;
  int64_t lo_ = 0;
  int64_t hi_ = 0;
  // Site laws: value_[i] is p at site lo_+i. Bond laws: value_[i] is
  // c_{x,x+1} for x = lo_+i-1 (one extra bond on the left).
  std::vector<double> value_;
  std::vector<int32_t> atom_;
  std::vector<uint32_t> thr_;
  // Atom-level tables.
  std::vector<double> atom_cdf_;
  std::vector<std::vector<uint32_t>> jump_thr_;
};

/// Convenience constructor: realize(law, seed, [a, b]).
Environment realize(const EnvironmentLaw& law, uint64_t seed, int64_t a, int64_t b);

/// rho_x = (1 - p_x)/p_x of a realized environment; 0 at a diode. Throws
/// DomainError for non-site models or p_x <= 0.
double site_rho(Environment& env, int64_t x);

/// Draws the uniform in [0, 1) that selects the atom at site x.
double site_uniform(uint64_t seed, int64_t x);

}  // namespace rwre
