#include "cli/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rwre/error.hpp"

namespace rwre::cli {

using nlohmann::json;

Table::Table(std::string name, std::vector<Column> columns) : name_(std::move(name)), columns_(std::move(columns)) {
  if (columns_.empty()) throw DomainError("table " + name_ + ": no columns");
}

Table& Table::add(std::vector<Cell> row) {
  if (row.size() != columns_.size()) throw DomainError("table " + name_ + ": row width mismatch");
  for (size_t i = 0; i < row.size(); ++i) {
    const ColumnType t = columns_[i].type;
    // integers are accepted in real columns
    if (t == ColumnType::Real && std::holds_alternative<int64_t>(row[i]))
      row[i] = static_cast<double>(std::get<int64_t>(row[i]));
    const bool ok = (t == ColumnType::Integer && std::holds_alternative<int64_t>(row[i])) ||
                    (t == ColumnType::Real && std::holds_alternative<double>(row[i])) ||
                    (t == ColumnType::Text && std::holds_alternative<std::string>(row[i])) ||
                    (t == ColumnType::Boolean && std::holds_alternative<bool>(row[i]));
    if (!ok) throw DomainError("table " + name_ + ": column " + columns_[i].name + " has the wrong type");
  }
  rows_.push_back(std::move(row));
  return *this;
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

namespace {

std::string cell_text(const Cell& c) {
  if (const auto* i = std::get_if<int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) return format_real(*d);
  if (const auto* b = std::get_if<bool>(&c)) return *b ? "true" : "false";
  return std::get<std::string>(c);
}

}  // namespace

std::string Table::csv() const {
  std::string out;
  for (size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + csv_field(columns_[i].name);
  out += "\r\n";
  for (const auto& row : rows_) {
    for (size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(cell_text(row[i]));
    out += "\r\n";
  }
  return out;
}

// ---- plots

namespace {

struct Axis {
  bool log = false;
  double lo = 0, hi = 1;
  double map(double v) const { return log ? std::log10(v) : v; }
};

bool drawable(double v, bool log) { return std::isfinite(v) && (!log || v > 0); }

std::vector<std::pair<double, double>> drawn_points(const Series& s, const Plot& p) {
  std::vector<std::pair<double, double>> pts;
  for (size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
    if (drawable(s.x[i], p.log_x) && drawable(s.y[i], p.log_y)) pts.emplace_back(s.x[i], s.y[i]);
  return pts;
}

Axis make_axis(const std::vector<double>& vals, bool log) {
  Axis a;
  a.log = log;
  if (vals.empty()) return a;
  double lo = a.map(*std::min_element(vals.begin(), vals.end()));
  double hi = a.map(*std::max_element(vals.begin(), vals.end()));
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.04 * (hi - lo);
  a.lo = lo - pad;
  a.hi = hi + pad;
  return a;
}

std::vector<double> ticks(const Axis& a) {
  std::vector<double> t;
  if (a.log) {
    for (double d = std::ceil(a.lo); d <= a.hi; d += 1) t.push_back(d);
    if (t.size() > 10) {
      std::vector<double> thin;
      const size_t stride = (t.size() + 9) / 10;
      for (size_t i = 0; i < t.size(); i += stride) thin.push_back(t[i]);
      t = thin;
    }
    return t;
  }
  const double raw = (a.hi - a.lo) / 5;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  for (double v = std::ceil(a.lo / step) * step; v <= a.hi + 1e-12 * step; v += step) t.push_back(v);
  return t;
}

std::string tick_label(double v, bool log) {
  char buf[32];
  if (log) std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(std::lround(v)));
  else std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string plot_svg(const Plot& p) {
  constexpr double W = 720, H = 460, ml = 70, mr = 170, mt = 40, mb = 55;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  std::vector<double> xs, ys;
  std::vector<std::vector<std::pair<double, double>>> pts;
  for (const auto& s : p.series) {
    pts.push_back(drawn_points(s, p));
    for (auto [x, y] : pts.back()) {
      xs.push_back(x);
      ys.push_back(y);
    }
  }
  const Axis ax = make_axis(xs, p.log_x), ay = make_axis(ys, p.log_y);
  const auto X = [&](double v) { return ml + (ax.map(v) - ax.lo) / (ax.hi - ax.lo) * (W - ml - mr); };
  const auto Y = [&](double v) { return H - mb - (ay.map(v) - ay.lo) / (ay.hi - ay.lo) * (H - mt - mb); };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"460\" viewBox=\"0 0 720 460\" "
                  "font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"720\" height=\"460\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt(ml) + "\" y=\"22\" font-size=\"14\">" + xml_escape(p.title) + "</text>\n";
  s += "<rect x=\"" + fmt(ml) + "\" y=\"" + fmt(mt) + "\" width=\"" + fmt(W - ml - mr) + "\" height=\"" +
       fmt(H - mt - mb) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(ax)) {
    const double x = ml + (t - ax.lo) / (ax.hi - ax.lo) * (W - ml - mr);
    s += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(H - mb) + "\" x2=\"" + fmt(x) + "\" y2=\"" + fmt(H - mb + 5) +
         "\" stroke=\"black\"/><text x=\"" + fmt(x) + "\" y=\"" + fmt(H - mb + 18) + "\" text-anchor=\"middle\">" +
         tick_label(t, ax.log) + "</text>\n";
  }
  for (double t : ticks(ay)) {
    const double y = H - mb - (t - ay.lo) / (ay.hi - ay.lo) * (H - mt - mb);
    s += "<line x1=\"" + fmt(ml - 5) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(ml) + "\" y2=\"" + fmt(y) +
         "\" stroke=\"black\"/><text x=\"" + fmt(ml - 8) + "\" y=\"" + fmt(y + 4) + "\" text-anchor=\"end\">" +
         tick_label(t, ay.log) + "</text>\n";
  }
  s += "<text x=\"" + fmt((ml + W - mr) / 2) + "\" y=\"" + fmt(H - 12) + "\" text-anchor=\"middle\">" +
       xml_escape(p.x_label) + "</text>\n";
  s += "<text transform=\"translate(16," + fmt((mt + H - mb) / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
       xml_escape(p.y_label) + "</text>\n";
  for (size_t k = 0; k < p.series.size(); ++k) {
    const char* c = colors[k % 8];
    if (p.series[k].points) {
      for (auto [x, y] : pts[k])
        s += "<circle cx=\"" + fmt(X(x)) + "\" cy=\"" + fmt(Y(y)) + "\" r=\"2.5\" fill=\"" + c + "\"/>\n";
    } else if (!pts[k].empty()) {
      s += "<polyline fill=\"none\" stroke=\"" + std::string(c) + "\" stroke-width=\"1.5\" points=\"";
      for (auto [x, y] : pts[k]) s += fmt(X(x)) + "," + fmt(Y(y)) + " ";
      s += "\"/>\n";
    }
    const double ly = mt + 14 + 18 * static_cast<double>(k);
    s += "<rect x=\"" + fmt(W - mr + 12) + "\" y=\"" + fmt(ly - 9) + "\" width=\"12\" height=\"10\" fill=\"" + c +
         "\"/><text x=\"" + fmt(W - mr + 30) + "\" y=\"" + fmt(ly) + "\">" + xml_escape(p.series[k].label) +
         "</text>\n";
  }
  return s + "</svg>\n";
}

Table plot_table(const Plot& p) {
  Table t(p.name, {{"series", ColumnType::Text}, {"x", ColumnType::Real}, {"y", ColumnType::Real}});
  for (const auto& s : p.series)
    for (auto [x, y] : drawn_points(s, p)) t.add({s.label, x, y});
  return t;
}

// ---- results

bool ScenarioResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

Check& ScenarioResult::check(std::string name, bool pass, double value, std::string expected, std::string detail) {
  checks.push_back({std::move(name), pass, value, std::move(expected), std::move(detail)});
  return checks.back();
}

json jnum(double v) {
  if (std::isfinite(v)) return v;
  return format_real(v);
}

std::string version_string() {
#ifdef RWRE_VERSION
  return RWRE_VERSION;
#else
  return "0.0.0";
#endif
}

json summary_json(const ExperimentConfig& cfg, const ScenarioResult& r) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"value", jnum(c.value)}, {"expected", c.expected},
                      {"detail", c.detail}});
  json tables = json::array(), plots = json::array();
  for (const auto& t : r.tables) tables.push_back(t.name() + ".csv");
  for (const auto& p : r.plots) plots.push_back({{"svg", p.name + ".svg"}, {"table", p.name + ".csv"}});
  json cfg_j = to_json(cfg);
  cfg_j.erase("threads");
  cfg_j.erase("output");
  return {{"provenance",
           {{"config_hash", hex64(config_hash(cfg))},
            {"seed", cfg.seed},
            {"scenario", cfg.scenario},
            {"version", version_string()},
            {"json_library", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                 std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                 std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"timing_file", "timing.json"}}},
          {"config", cfg_j},
          {"effective_params", r.effective_params},
          {"effective_tolerances", r.effective_tolerances},
          {"checks", checks},
          {"passed", r.passed()},
          {"metrics", r.metrics},
          {"tables", tables},
          {"plots", plots}};
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error(p.string() + ": cannot write");
  out << text;
}

}  // namespace

void write_result(const std::string& dir, const ExperimentConfig& cfg, const ScenarioResult& r) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path d(dir);
  write_file(d / "summary.json", summary_json(cfg, r).dump(2) + "\n");
  for (const auto& t : r.tables) write_file(d / (t.name() + ".csv"), t.csv());
  for (const auto& p : r.plots) {
    write_file(d / (p.name + ".svg"), plot_svg(p));
    write_file(d / (p.name + ".csv"), plot_table(p).csv());
  }
}

void write_timing(const std::string& dir, double wall_seconds, int threads) {
  std::filesystem::create_directories(dir);
  const json j = {{"wall_seconds", wall_seconds}, {"threads", threads}};
  write_file(std::filesystem::path(dir) / "timing.json", j.dump(2) + "\n");
}

}  // namespace rwre::cli
