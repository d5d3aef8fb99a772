#pragma once
// Result tables, checks, plots and the files they are written to.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cli/config.hpp"

namespace rwre::cli {

enum class ColumnType { Integer, Real, Text, Boolean };

struct Column {
  std::string name;
  ColumnType type = ColumnType::Real;
};

using Cell = std::variant<int64_t, double, std::string, bool>;

/// Named, typed columns fixed at construction; rows are checked against them.
class Table {
 public:
  Table(std::string name, std::vector<Column> columns);

  Table& add(std::vector<Cell> row);
  const std::string& name() const { return name_; }
  const std::vector<Column>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }

  /// RFC 4180: CRLF line ends, header row, fields quoted when needed.
  std::string csv() const;

 private:
  std::string name_;
  std::vector<Column> columns_;
  std::vector<std::vector<Cell>> rows_;
};

std::string format_real(double v);  ///< %.17g, with inf/-inf/nan spelled out
std::string csv_field(const std::string& s);

struct Series {
  std::string label;
  std::vector<double> x, y;
  bool points = false;  ///< markers instead of a polyline
};

struct Plot {
  std::string name;
  std::string title;
  std::string x_label, y_label;
  bool log_x = false, log_y = false;
  std::vector<Series> series;
};

std::string plot_svg(const Plot& p);
/// Long-form table (series, x, y) holding exactly what plot_svg draws.
Table plot_table(const Plot& p);

struct Check {
  std::string name;
  bool pass = false;
  double value = 0;
  std::string expected;  ///< human-readable target, e.g. "0.5 +- 0.05"
  std::string detail;
};

struct ScenarioResult {
  std::vector<Table> tables;
  std::vector<Plot> plots;
  std::vector<Check> checks;
  nlohmann::json metrics = nlohmann::json::object();
  nlohmann::json effective_params = nlohmann::json::object();
  nlohmann::json effective_tolerances = nlohmann::json::object();

  bool passed() const;
  Check& check(std::string name, bool pass, double value, std::string expected, std::string detail = {});
};

/// JSON number, or a string for non-finite values.
nlohmann::json jnum(double v);

std::string version_string();

/// summary.json, one CSV per table, SVG + CSV per plot. Contents depend only
/// on (config, result); wall time and threads go to timing.json.
void write_result(const std::string& dir, const ExperimentConfig& cfg, const ScenarioResult& r);
void write_timing(const std::string& dir, double wall_seconds, int threads);

nlohmann::json summary_json(const ExperimentConfig& cfg, const ScenarioResult& r);

}  // namespace rwre::cli
