#include "cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "rwre/error.hpp"

namespace rwre::cli {
namespace {

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
}

void allow_keys(const json& j, const std::set<std::string>& keys, const std::string& path) {
  for (const auto& [k, v] : j.items())
    if (!keys.count(k)) throw ConfigError(path + "." + k + ": unknown key");
}

const json& at(const json& obj, const std::string& key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path + ": missing key '" + key + "'");
  return *it;
}

double real_value(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  return v.get<double>();
}

std::vector<double> real_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers");
  std::vector<double> out;
  for (size_t i = 0; i < v.size(); ++i) out.push_back(real_value(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

// [[value, weight], ...]
template <class Atom>
std::vector<Atom> pair_atoms(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError(path + ": expected a non-empty array of [value, weight]");
  std::vector<Atom> out;
  for (size_t i = 0; i < v.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const auto pr = real_list(v[i], p);
    if (pr.size() != 2) throw ConfigError(p + ": expected [value, weight]");
    out.push_back(Atom{pr[0], pr[1]});
  }
  return out;
}

std::pair<size_t, size_t> line_col(const std::string& text, size_t byte) {
  size_t line = 1, col = 1;
  for (size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json canonical(const ExperimentConfig& c) {
  return json{{"scenario", c.scenario}, {"seed", c.seed}, {"params", c.params}, {"tolerances", c.tolerances}};
}

}  // namespace

double get_real(const json& obj, const std::string& key, const std::string& path) {
  return real_value(at(obj, key, path), path + "." + key);
}

int64_t get_int(const json& obj, const std::string& key, const std::string& path) {
  const json& v = at(obj, key, path);
  if (v.is_number_integer()) return v.get<int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == static_cast<double>(static_cast<int64_t>(d))) return static_cast<int64_t>(d);
  }
  throw ConfigError(path + "." + key + ": expected an integer");
}

EnvironmentLaw law_from_json(const json& j, const std::string& path) {
  require_object(j, path);
  const json& t = at(j, "type", path);
  if (!t.is_string()) throw ConfigError(path + ".type: expected a string");
  const std::string type = t.get<std::string>();
  EnvironmentLaw law;
  if (type == "two_point") {
    allow_keys(j, {"type", "alpha", "beta"}, path);
    law = TwoPointSites{get_real(j, "alpha", path), get_real(j, "beta", path)};
  } else if (type == "diode") {
    allow_keys(j, {"type", "alpha", "rho"}, path);
    law = Diode{get_real(j, "alpha", path), get_real(j, "rho", path)};
  } else if (type == "sites") {
    allow_keys(j, {"type", "atoms"}, path);
    law = DiscreteSites{pair_atoms<SiteAtom>(at(j, "atoms", path), path + ".atoms")};
  } else if (type == "bonds") {
    allow_keys(j, {"type", "atoms"}, path);
    law = BondWeights{pair_atoms<ValueAtom>(at(j, "atoms", path), path + ".atoms")};
  } else if (type == "rates") {
    allow_keys(j, {"type", "atoms"}, path);
    law = Rates{pair_atoms<ValueAtom>(at(j, "atoms", path), path + ".atoms")};
  } else if (type == "rates_power_law") {
    allow_keys(j, {"type", "alpha"}, path);
    law = RatesPowerLaw{get_real(j, "alpha", path)};
  } else if (type == "bounded_jump" || type == "balanced") {
    const bool jump = type == "bounded_jump";
    allow_keys(j, jump ? std::set<std::string>{"type", "L", "R", "atoms"} : std::set<std::string>{"type", "dim", "atoms"},
               path);
    const json& atoms = at(j, "atoms", path);
    if (!atoms.is_array() || atoms.empty()) throw ConfigError(path + ".atoms: expected a non-empty array");
    const char* vec_key = jump ? "probs" : "axis";
    if (jump) {
      BoundedJump b{static_cast<int>(get_int(j, "L", path)), static_cast<int>(get_int(j, "R", path)), {}};
      for (size_t i = 0; i < atoms.size(); ++i) {
        const std::string p = path + ".atoms[" + std::to_string(i) + "]";
        require_object(atoms[i], p);
        allow_keys(atoms[i], {vec_key, "weight"}, p);
        b.atoms.push_back({real_list(at(atoms[i], vec_key, p), p + "." + vec_key), get_real(atoms[i], "weight", p)});
      }
      law = b;
    } else {
      Balanced b{static_cast<int>(get_int(j, "dim", path)), {}};
      for (size_t i = 0; i < atoms.size(); ++i) {
        const std::string p = path + ".atoms[" + std::to_string(i) + "]";
        require_object(atoms[i], p);
        allow_keys(atoms[i], {vec_key, "weight"}, p);
        b.atoms.push_back({real_list(at(atoms[i], vec_key, p), p + "." + vec_key), get_real(atoms[i], "weight", p)});
      }
      law = b;
    }
  } else {
    throw ConfigError(path + ".type: unknown law type '" + type + "'");
  }
  try {
    check_law(law);
  } catch (const InvalidLaw& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return law;
}

json law_to_json(const EnvironmentLaw& law) {
  const auto pairs = [](const auto& atoms) {
    json a = json::array();
    for (const auto& x : atoms) {
      if constexpr (requires { x.p; }) a.push_back({x.p, x.weight});
      else a.push_back({x.value, x.weight});
    }
    return a;
  };
  if (const auto* l = std::get_if<TwoPointSites>(&law)) return {{"type", "two_point"}, {"alpha", l->alpha}, {"beta", l->beta}};
  if (const auto* l = std::get_if<Diode>(&law)) return {{"type", "diode"}, {"alpha", l->alpha}, {"rho", l->rho}};
  if (const auto* l = std::get_if<DiscreteSites>(&law)) return {{"type", "sites"}, {"atoms", pairs(l->atoms)}};
  if (const auto* l = std::get_if<BondWeights>(&law)) return {{"type", "bonds"}, {"atoms", pairs(l->atoms)}};
  if (const auto* l = std::get_if<Rates>(&law)) return {{"type", "rates"}, {"atoms", pairs(l->atoms)}};
  if (const auto* l = std::get_if<RatesPowerLaw>(&law)) return {{"type", "rates_power_law"}, {"alpha", l->alpha_exponent}};
  if (const auto* l = std::get_if<BoundedJump>(&law)) {
    json a = json::array();
    for (const auto& x : l->atoms) a.push_back({{"probs", x.probs}, {"weight", x.weight}});
    return {{"type", "bounded_jump"}, {"L", l->L}, {"R", l->R}, {"atoms", a}};
  }
  const auto& b = std::get<Balanced>(law);
  json a = json::array();
  for (const auto& x : b.atoms) a.push_back({{"axis", x.axis}, {"weight", x.weight}});
  return {{"type", "balanced"}, {"dim", b.dim}, {"atoms", a}};
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte);
    std::string msg = e.what();
    const auto pos = msg.find("; ");
    if (pos != std::string::npos) msg = msg.substr(pos + 2);
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }
  require_object(j, "config");
  allow_keys(j, {"scenario", "seed", "threads", "output", "params", "tolerances"}, "config");
  ExperimentConfig c;
  const json& s = at(j, "scenario", "config");
  if (!s.is_string()) throw ConfigError("config.scenario: expected a string");
  c.scenario = s.get<std::string>();
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<int64_t>() >= 0))
      throw ConfigError("config.seed: expected a non-negative integer");
    c.seed = j["seed"].get<uint64_t>();
  }
  if (j.contains("threads")) c.threads = static_cast<int>(get_int(j, "threads", "config"));
  if (c.threads < 0) throw ConfigError("config.threads: must be >= 0");
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ConfigError("config.output: expected a string");
    c.output = j["output"].get<std::string>();
  }
  if (j.contains("params")) {
    require_object(j["params"], "config.params");
    c.params = j["params"];
  }
  if (j.contains("tolerances")) {
    require_object(j["tolerances"], "config.tolerances");
    for (const auto& [k, v] : j["tolerances"].items())
      if (!v.is_number()) throw ConfigError("config.tolerances." + k + ": expected a number");
    c.tolerances = j["tolerances"];
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

json to_json(const ExperimentConfig& c) {
  json j = canonical(c);
  j["threads"] = c.threads;
  j["output"] = c.output;
  return j;
}

uint64_t config_hash(const ExperimentConfig& c) {
  const std::string s = canonical(c).dump();
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(uint64_t v) {
  static const char* d = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<size_t>(i)] = d[v & 15];
  return s;
}

}  // namespace rwre::cli
