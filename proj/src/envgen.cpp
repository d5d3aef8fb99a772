#include "rwre/envgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "rwre/error.hpp"
#include "rwre/philox.hpp"

namespace rwre {
namespace {

constexpr double kWeightTol = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    std::ostringstream os;
    os << what << " = " << p << " is not a probability";
    throw InvalidLaw(os.str());
  }
}

template <class Atoms, class Weight>
void check_weights(const Atoms& atoms, Weight weight_of, const char* law) {
  if (atoms.empty()) throw InvalidLaw(std::string(law) + ": no atoms");
  double total = 0.0;
  for (const auto& a : atoms) {
    const double w = weight_of(a);
    if (!(w >= 0.0) || !std::isfinite(w))
      throw InvalidLaw(std::string(law) + ": negative or non-finite weight");
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightTol) {
    std::ostringstream os;
    os << law << ": weights sum to " << total << ", expected 1";
    throw InvalidLaw(os.str());
  }
}

double real_gcd(double a, double b, double tol) {
  a = std::abs(a);
  b = std::abs(b);
  if (a < b) std::swap(a, b);
  while (b > tol) {
    const double r = std::fmod(a, b);
    a = b;
    b = r;
  }
  return a;
}

std::vector<double> atom_cdf(const std::vector<double>& weights) {
  std::vector<double> cdf(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cdf.begin());
  if (!cdf.empty()) cdf.back() = std::numeric_limits<double>::infinity();
  return cdf;
}

int32_t pick_atom(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return static_cast<int32_t>(std::min<ptrdiff_t>(it - cdf.begin(),
                                                  static_cast<ptrdiff_t>(cdf.size()) - 1));
}

int64_t floor_block(int64_t x) {
  const int64_t b = Environment::kBlock;
  return (x >= 0 ? x / b : -((-x + b - 1) / b)) * b;
}

}  // namespace

SiteModel site_model(const EnvironmentLaw& law) {
  return std::visit(
      Overloaded{[](const TwoPointSites&) { return SiteModel::NearestNeighbor; },
                 [](const Diode&) { return SiteModel::NearestNeighbor; },
                 [](const DiscreteSites&) { return SiteModel::NearestNeighbor; },
                 [](const BoundedJump&) { return SiteModel::BoundedJump; },
                 [](const BondWeights&) { return SiteModel::Bond; },
                 [](const Rates&) { return SiteModel::Bond; },
                 [](const RatesPowerLaw&) { return SiteModel::Bond; },
                 [](const Balanced&) { return SiteModel::Balanced; }},
      law);
}

std::string law_name(const EnvironmentLaw& law) {
  return std::visit(Overloaded{[](const TwoPointSites&) { return "TwoPointSites"; },
                               [](const Diode&) { return "Diode"; },
                               [](const DiscreteSites&) { return "DiscreteSites"; },
                               [](const BoundedJump&) { return "BoundedJump"; },
                               [](const BondWeights&) { return "BondWeights"; },
                               [](const Rates&) { return "Rates"; },
                               [](const RatesPowerLaw&) { return "RatesPowerLaw"; },
                               [](const Balanced&) { return "Balanced"; }},
                    law);
}

std::string describe(const EnvironmentLaw& law) {
  std::ostringstream os;
  os.precision(17);
  os << law_name(law) << '{';
  std::visit(Overloaded{[&](const TwoPointSites& l) { os << l.alpha << ',' << l.beta; },
                        [&](const Diode& l) { os << l.alpha << ',' << l.rho; },
                        [&](const DiscreteSites& l) {
                          for (const auto& a : l.atoms) os << '(' << a.p << ',' << a.weight << ')';
                        },
                        [&](const BoundedJump& l) {
                          os << l.L << ',' << l.R;
                          for (const auto& a : l.atoms) {
                            os << "([";
                            for (double q : a.probs) os << q << ' ';
                            os << "]," << a.weight << ')';
                          }
                        },
                        [&](const BondWeights& l) {
                          for (const auto& a : l.atoms) os << '(' << a.value << ',' << a.weight << ')';
                        },
                        [&](const Rates& l) {
                          for (const auto& a : l.atoms) os << '(' << a.value << ',' << a.weight << ')';
                        },
                        [&](const RatesPowerLaw& l) { os << l.alpha_exponent; },
                        [&](const Balanced& l) {
                          os << l.dim;
                          for (const auto& a : l.atoms) {
                            os << "([";
                            for (double q : a.axis) os << q << ' ';
                            os << "]," << a.weight << ')';
                          }
                        }},
             law);
  os << '}';
  return os.str();
}

void check_law(const EnvironmentLaw& law) {
  std::visit(
      Overloaded{
          [](const TwoPointSites& l) {
            check_probability(l.alpha, "TwoPointSites.alpha");
            check_probability(l.beta, "TwoPointSites.beta");
            if (l.beta <= 0.0 || l.beta >= 1.0)
              throw InvalidLaw("TwoPointSites.beta must lie in (0, 1)");
          },
          [](const Diode& l) {
            check_probability(l.alpha, "Diode.alpha");
            if (!(l.rho > 0.0) || !std::isfinite(l.rho))
              throw InvalidLaw("Diode.rho must be positive and finite");
          },
          [](const DiscreteSites& l) {
            check_weights(l.atoms, [](const SiteAtom& a) { return a.weight; }, "DiscreteSites");
            for (const auto& a : l.atoms) {
              check_probability(a.p, "DiscreteSites.p");
              if (a.p <= 0.0 && a.weight > 0.0)
                throw InvalidLaw("DiscreteSites: atom with p = 0 (walk cannot move right)");
            }
          },
          [](const BoundedJump& l) {
            if (l.L < 1 || l.R < 1) throw InvalidLaw("BoundedJump: L and R must be >= 1");
            check_weights(l.atoms, [](const JumpAtom& a) { return a.weight; }, "BoundedJump");
            const auto width = static_cast<size_t>(l.L + l.R + 1);
            for (const auto& a : l.atoms) {
              if (a.probs.size() != width)
                throw InvalidLaw("BoundedJump: probability vector must have L+R+1 entries");
              double s = 0.0;
              for (double q : a.probs) {
                check_probability(q, "BoundedJump.p");
                s += q;
              }
              if (std::abs(s - 1.0) > kWeightTol)
                throw InvalidLaw("BoundedJump: probability vector does not sum to 1");
              if (a.weight > 0.0 && (a.probs.front() <= 0.0 || a.probs.back() <= 0.0))
                throw InvalidLaw("BoundedJump: p(-L) and p(R) must be positive");
            }
          },
          [](const BondWeights& l) {
            check_weights(l.atoms, [](const ValueAtom& a) { return a.weight; }, "BondWeights");
            for (const auto& a : l.atoms)
              if (!(a.value > 0.0) || !std::isfinite(a.value))
                throw InvalidLaw("BondWeights: conductances must be positive");
          },
          [](const Rates& l) {
            check_weights(l.atoms, [](const ValueAtom& a) { return a.weight; }, "Rates");
            for (const auto& a : l.atoms)
              if (!(a.value > 0.0) || !std::isfinite(a.value))
                throw InvalidLaw("Rates: rates must be positive");
          },
          [](const RatesPowerLaw& l) {
            if (!(l.alpha_exponent > 0.0 && l.alpha_exponent < 1.0))
              throw InvalidLaw("RatesPowerLaw: exponent must lie in (0, 1)");
          },
          [](const Balanced& l) {
            if (l.dim < 1) throw InvalidLaw("Balanced: dimension must be >= 1");
            check_weights(l.atoms, [](const BalancedAtom& a) { return a.weight; }, "Balanced");
            for (const auto& a : l.atoms) {
              if (a.axis.size() != static_cast<size_t>(l.dim))
                throw InvalidLaw("Balanced: axis vector must have d entries");
              double s = 0.0;
              for (double q : a.axis) {
                check_probability(q, "Balanced.p");
                s += q;
              }
              if (std::abs(2.0 * s - 1.0) > kWeightTol)
                throw InvalidLaw("Balanced: 2 * sum of axis probabilities must be 1");
            }
          }},
      law);
}

std::vector<SiteAtom> site_atoms(const EnvironmentLaw& law) {
  std::vector<SiteAtom> atoms;
  std::visit(Overloaded{[&](const TwoPointSites& l) {
                          if (l.beta == 1.0 - l.beta) {
                            atoms.push_back({l.beta, 1.0});
                            return;
                          }
                          atoms.push_back({l.beta, l.alpha});
                          atoms.push_back({1.0 - l.beta, 1.0 - l.alpha});
                        },
                        [&](const Diode& l) {
                          atoms.push_back({1.0 / (1.0 + l.rho), l.alpha});
                          atoms.push_back({1.0, 1.0 - l.alpha});
                        },
                        [&](const DiscreteSites& l) { atoms = l.atoms; },
                        [&](const auto&) {
                          throw DomainError(law_name(law) + " is not a nearest-neighbour site law");
                        }},
             law);
  std::erase_if(atoms, [](const SiteAtom& a) { return a.weight <= 0.0; });
  return atoms;
}

std::vector<ValueAtom> value_atoms(const EnvironmentLaw& law) {
  std::vector<ValueAtom> atoms;
  if (const auto* b = std::get_if<BondWeights>(&law)) atoms = b->atoms;
  else if (const auto* r = std::get_if<Rates>(&law)) atoms = r->atoms;
  else if (!std::holds_alternative<RatesPowerLaw>(law))
    throw DomainError(law_name(law) + " is not a bond or rate law");
  std::erase_if(atoms, [](const ValueAtom& a) { return a.weight <= 0.0; });
  return atoms;
}

LawReport validate(const EnvironmentLaw& law) {
  LawReport rep;
  const SiteModel model = site_model(law);
  if (model == SiteModel::NearestNeighbor) {
    const auto atoms = site_atoms(law);
    double delta = std::numeric_limits<double>::infinity();
    std::vector<double> logs;
    for (const auto& a : atoms) {
      if (a.p >= 1.0) {
        rep.has_diode_atom = true;
        rep.ellipticity_violated = true;
        rep.eta_finite = false;
        continue;
      }
      delta = std::min(delta, std::min(a.p, 1.0 - a.p));
      logs.push_back(std::log((1.0 - a.p) / a.p));
    }
    if (std::isfinite(delta) && delta > 0.0) rep.ellipticity = delta;
    if (rep.has_diode_atom)
      rep.notes.push_back("atom at p = 1: ellipticity violated, ln rho has an atom at -inf");
    std::sort(logs.begin(), logs.end());
    logs.erase(std::unique(logs.begin(), logs.end(),
                           [](double x, double y) { return std::abs(x - y) <= 1e-14; }),
               logs.end());
    const bool all_zero =
        std::all_of(logs.begin(), logs.end(), [](double v) { return std::abs(v) <= 1e-14; });
    rep.degenerate = !rep.has_diode_atom && logs.size() == 1;
    if (!logs.empty() && !all_zero) {
      double scale = 0.0;
      for (double v : logs) scale = std::max(scale, std::abs(v));
      double g = 0.0;
      for (double v : logs)
        if (std::abs(v) > 1e-14) g = (g == 0.0) ? std::abs(v) : real_gcd(g, v, 1e-9 * scale);
      bool on_lattice = g >= 1e-6 * scale;
      if (on_lattice) {
        for (double v : logs) {
          const double k = v / g;
          if (std::abs(k - std::round(k)) > 1e-7 * std::max(1.0, std::abs(k))) on_lattice = false;
        }
      }
      rep.arithmetic = on_lattice;
      if (on_lattice) rep.lattice_span = g;
    } else if (all_zero && !logs.empty()) {
      rep.arithmetic = true;  // single point at 0
    }
    if (rep.arithmetic) rep.notes.push_back("ln rho is arithmetic (lattice-supported)");
    return rep;
  }
  std::visit(Overloaded{[&](const BoundedJump& l) {
                          double delta = std::numeric_limits<double>::infinity();
                          for (const auto& a : l.atoms)
                            for (size_t i = 0; i < a.probs.size(); ++i)
                              if (static_cast<int>(i) != l.L) delta = std::min(delta, a.probs[i]);
                          if (delta > 0.0) rep.ellipticity = delta;
                          else rep.ellipticity_violated = true;
                        },
                        [&](const Balanced& l) {
                          double delta = std::numeric_limits<double>::infinity();
                          for (const auto& a : l.atoms)
                            for (double q : a.axis) delta = std::min(delta, q);
                          if (delta > 0.0) rep.ellipticity = delta;
                          else rep.ellipticity_violated = true;
                        },
                        [&](const RatesPowerLaw&) {
                          rep.notes.push_back("rates accumulate at 0: E c^{-1} is infinite");
                        },
                        [&](const auto&) { rep.notes.push_back("bond/rate law: ellipticity n/a"); }},
             law);
  return rep;
}

double site_uniform(uint64_t seed, int64_t x) {
  const auto w = philox4x32(make_counter(static_cast<uint64_t>(x), Stream::Site), key_from_seed(seed));
  return unit_closed_open(w[0], w[1]);
}

Environment::Environment(std::shared_ptr<const EnvironmentLaw> law, uint64_t seed)
    : law_(std::move(law)), model_(site_model(*law_)), seed_(seed) {
  check_law(*law_);
  std::vector<double> weights;
  std::visit(Overloaded{[&](const BoundedJump& l) {
                          for (const auto& a : l.atoms) {
                            weights.push_back(a.weight);
                            std::vector<uint32_t> thr;
                            double cum = 0.0;
                            const int width = l.L + l.R + 1;
                            for (int j = 0; j < width; ++j) {
                              cum += a.probs[static_cast<size_t>(width - 1 - j)];
                              thr.push_back(j + 1 == width ? 0xFFFFFFFFu : step_threshold(cum));
                            }
                            jump_thr_.push_back(std::move(thr));
                          }
                        },
                        [&](const Balanced&) {},
                        [&](const RatesPowerLaw&) {},
                        [&](const auto&) {
                          if (model_ == SiteModel::NearestNeighbor) {
                            for (const auto& a : site_atoms(*law_)) weights.push_back(a.weight);
                          } else {
                            for (const auto& a : value_atoms(*law_)) weights.push_back(a.weight);
                          }
                        }},
             *law_);
  atom_cdf_ = atom_cdf(weights);
}

Environment::Environment(const EnvironmentLaw& law, uint64_t seed)
    : Environment(std::make_shared<const EnvironmentLaw>(law), seed) {}

void Environment::realize(int64_t a, int64_t b, std::vector<double>& value,
                          std::vector<int32_t>& atom) const {
  // Sites (or bonds) a..b-1.
  const PhiloxKey key = key_from_seed(seed_);
  std::vector<SiteAtom> satoms;
  std::vector<ValueAtom> vatoms;
  double power = 0.0;
  if (model_ == SiteModel::NearestNeighbor) satoms = site_atoms(*law_);
  if (model_ == SiteModel::Bond) {
    if (const auto* pl = std::get_if<RatesPowerLaw>(law_.get()))
      power = 1.0 / (1.0 - pl->alpha_exponent);
    else
      vatoms = value_atoms(*law_);
  }
  for (int64_t x = a; x < b; ++x) {
    const auto w = philox4x32(make_counter(static_cast<uint64_t>(x), Stream::Site), key);
    if (power > 0.0) {
      value.push_back(std::pow(unit_open_closed(w[2], w[3]), power));
      atom.push_back(-1);
      continue;
    }
    const int32_t k = pick_atom(atom_cdf_, unit_closed_open(w[0], w[1]));
    atom.push_back(k);
    if (model_ == SiteModel::NearestNeighbor) value.push_back(satoms[static_cast<size_t>(k)].p);
    else if (model_ == SiteModel::Bond) value.push_back(vatoms[static_cast<size_t>(k)].value);
    else value.push_back(0.0);
  }
}

void Environment::ensure(int64_t a, int64_t b) {
  if (model_ == SiteModel::Balanced)
    throw DomainError("balanced laws live on Z^d; use the balanced walk engine");
  if (a > b) std::swap(a, b);
  if (hi_ > lo_ && a >= lo_ && b < hi_) return;
  int64_t new_lo = floor_block(a);
  int64_t new_hi = floor_block(b) + kBlock;
  if (hi_ > lo_) {
    const int64_t grow = floor_block((hi_ - lo_) / 2);
    if (new_lo < lo_) new_lo = std::min(new_lo, lo_ - grow);
    else new_lo = lo_;
    if (new_hi > hi_) new_hi = std::max(new_hi, hi_ + grow);
    else new_hi = hi_;
  }
  // Bond laws keep one extra bond on the left: value index i <-> bond lo+i-1.
  const int64_t pad = model_ == SiteModel::Bond ? 1 : 0;
  std::vector<double> value;
  std::vector<int32_t> atom;
  value.reserve(static_cast<size_t>(new_hi - new_lo + pad));
  atom.reserve(value.capacity());
  if (hi_ > lo_) {
    realize(new_lo - pad, lo_ - pad, value, atom);
    value.insert(value.end(), value_.begin(), value_.end());
    atom.insert(atom.end(), atom_.begin(), atom_.end());
    realize(hi_, new_hi, value, atom);
  } else {
    realize(new_lo - pad, new_hi, value, atom);
  }
  value_ = std::move(value);
  atom_ = std::move(atom);
  lo_ = new_lo;
  hi_ = new_hi;
  rebuild_thresholds();
}

void Environment::rebuild_thresholds() {
  const auto n = static_cast<size_t>(hi_ - lo_);
  thr_.resize(n);
  if (model_ == SiteModel::NearestNeighbor) {
    for (size_t i = 0; i < n; ++i) thr_[i] = step_threshold(value_[i]);
  } else if (model_ == SiteModel::Bond) {
    for (size_t i = 0; i < n; ++i) {
      const double left = value_[i];
      const double right = value_[i + 1];
      thr_[i] = step_threshold(right / (left + right));
    }
  } else {
    std::fill(thr_.begin(), thr_.end(), 0u);
  }
}

double Environment::p(int64_t x) {
  const size_t i = index(x);
  if (model_ == SiteModel::NearestNeighbor) return value_[i];
  if (model_ == SiteModel::Bond) return value_[i + 1] / (value_[i] + value_[i + 1]);
  throw DomainError("p(x) is defined for nearest-neighbour site and bond laws only");
}

double Environment::rho(int64_t x) {
  const size_t i = index(x);
  if (model_ == SiteModel::Bond) return value_[i] / value_[i + 1];
  if (model_ != SiteModel::NearestNeighbor)
    throw DomainError("rho(x) is defined for nearest-neighbour site and bond laws only");
  const double p = value_[i];
  if (p >= 1.0) return 0.0;
  return (1.0 - p) / p;
}

double Environment::log_rho(int64_t x) {
  const size_t i = index(x);
  if (model_ == SiteModel::Bond) return std::log(value_[i]) - std::log(value_[i + 1]);
  if (model_ != SiteModel::NearestNeighbor)
    throw DomainError("log_rho(x) is defined for nearest-neighbour site and bond laws only");
  const double p = value_[i];
  if (p >= 1.0) return -std::numeric_limits<double>::infinity();
  return std::log1p(-p) - std::log(p);
}

uint32_t Environment::threshold(int64_t x) { return thr_[index(x)]; }

double Environment::bond(int64_t x) {
  if (model_ != SiteModel::Bond) throw DomainError("bond(x) requires a bond or rate law");
  // bond x lives at value index x - lo + 1; ensure sites up to x+1.
  ensure(x, x + 1);
  return value_[static_cast<size_t>(x - lo_ + 1)];
}

std::span<const double> Environment::jump_probs(int64_t x) {
  const auto* l = std::get_if<BoundedJump>(law_.get());
  if (!l) throw DomainError("jump_probs(x) requires a bounded-jump law");
  return l->atoms[static_cast<size_t>(atom_[index(x)])].probs;
}

std::span<const uint32_t> Environment::jump_thresholds(int64_t x) {
  if (model_ != SiteModel::BoundedJump) throw DomainError("jump_thresholds(x) requires a bounded-jump law");
  return jump_thr_[static_cast<size_t>(atom_[index(x)])];
}

int32_t Environment::atom(int64_t x) {
  const size_t i = index(x);
  return atom_[model_ == SiteModel::Bond ? i + 1 : i];
}

Environment realize(const EnvironmentLaw& law, uint64_t seed, int64_t a, int64_t b) {
  if (a > b) throw DomainError("realize: empty site range");
  Environment env(law, seed);
  env.ensure(a, b);
  return env;
}

double site_rho(Environment& env, int64_t x) {
  if (env.model() != SiteModel::NearestNeighbor && env.model() != SiteModel::Bond)
    throw DomainError("site_rho requires a nearest-neighbour model");
  const double p = env.p(x);
  if (!(p > 0.0)) throw DomainError("site_rho: nonpositive p_x");
  return env.rho(x);
}

}  // namespace rwre
