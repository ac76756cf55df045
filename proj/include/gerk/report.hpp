#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gerk/bench.hpp"

namespace gerk {

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

struct Report {
  nlohmann::json doc;  // config echo, environment stamp, results
  std::vector<Table> tables;
};

/// Writes `report.json` and one `<table>.csv` per table into `dir`.
void write_report(const Report& report, const std::filesystem::path& dir);

void write_csv(const Table& table, const std::filesystem::path& path);
Table read_csv(const std::filesystem::path& path);

nlohmann::json environment_stamp();

void to_json(nlohmann::json& j, const BenchConfig& c);
void from_json(const nlohmann::json& j, BenchConfig& c);

/// Shortest round-trip decimal form.
std::string format_number(double v);

Report make_report(const BenchConfig& cfg, const UnlearnBenchResult& r);
Report make_report(const std::string& command, const BenchConfig& cfg, const UtilityResult& r);
Report make_report(const BenchConfig& cfg, const std::vector<ShardSweepRow>& rows);
Report make_report(const BenchConfig& cfg, const std::vector<RequestSweepRow>& rows);
Report make_report(const BenchConfig& cfg, const GuidelineResult& r);
Report make_report(const BenchConfig& cfg, const ScoreCorrelation& r);

struct ChartSeries {
  std::string name;
  std::vector<double> y;
};

/// Line chart (or scatter when `scatter`) over shared x values.
void write_svg_chart(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                     const std::vector<double>& x, const std::vector<ChartSeries>& series, bool scatter = false);

}  // namespace gerk
