#include "gerk/report.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include "gerk/config_json.hpp"
#include "gerk/error.hpp"

namespace gerk {

namespace {

using Json = nlohmann::json;

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

Json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

Report base_report(const std::string& command, const BenchConfig& cfg) {
  Report r;
  r.doc["command"] = command;
  r.doc["config"] = cfg;
  r.doc["dataset"] = cfg.dataset.describe();
  r.doc["environment"] = environment_stamp();
  return r;
}

void attach_tables(Report& r) {
  auto& tables = r.doc["tables"] = Json::object();
  for (const auto& t : r.tables) {
    Json rows = Json::array();
    for (const auto& row : t.rows) {
      Json obj = Json::object();
      for (std::size_t i = 0; i < t.header.size() && i < row.size(); ++i) obj[t.header[i]] = row[i];
      rows.push_back(std::move(obj));
    }
    tables[t.name] = std::move(rows);
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(const Table& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(row[i]);
    out << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  Table t;
  t.name = path.stem().string();
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty file");
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (!line.empty()) t.rows.push_back(split_csv_line(line));
  }
  return t;
}

void write_report(const Report& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  Report r = report;
  attach_tables(r);
  std::ofstream out(dir / "report.json");
  if (!out) throw ConfigError("cannot write " + (dir / "report.json").string());
  out << r.doc.dump(2) << '\n';
  for (const auto& t : report.tables) write_csv(t, dir / (t.name + ".csv"));
}

Json environment_stamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char when[32];
  std::strftime(when, sizeof(when), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
#if defined(__clang__)
  const std::string compiler = "clang " __clang_version__;
#elif defined(__GNUC__)
  const std::string compiler = "gcc " __VERSION__;
#else
  const std::string compiler = "unknown";
#endif
  return {{"timestamp", when},
          {"compiler", compiler},
          {"hardware_threads", std::thread::hardware_concurrency()},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)}};
}

void to_json(Json& j, const BenchConfig& c) {
  Json dataset = Json::object();
  if (c.dataset.sbm) dataset["sbm"] = *c.dataset.sbm;
  if (!c.dataset.node_file.empty()) dataset["node_file"] = c.dataset.node_file.string();
  if (!c.dataset.edge_file.empty()) dataset["edge_file"] = c.dataset.edge_file.string();
  if (!c.dataset.snapshot.empty()) dataset["snapshot"] = c.dataset.snapshot.string();
  Json methods = Json::array();
  for (auto m : c.methods) methods.push_back(to_string(m));
  Json modes = Json::array();
  for (auto m : c.modes) modes.push_back(to_string(m));
  j = {{"dataset", dataset},
       {"methods", methods},
       {"eraser", c.eraser},
       {"modes", modes},
       {"n_requests", c.n_requests},
       {"request_kind", c.request_kind == RequestKind::kNode ? "node" : "edge"},
       {"repetitions", c.repetitions},
       {"seed", c.seed},
       {"train_ratio", c.train_ratio},
       {"stratified_split", c.stratified_split},
       {"scratch_requests", c.scratch_requests},
       {"f1_average", c.f1_average == F1Average::kMicro ? "micro" : "macro"},
       {"mlp", c.mlp},
       {"guideline_threshold", c.guideline_threshold},
       {"k_list", c.k_list},
       {"request_counts", c.request_counts},
       {"workers", c.workers}};
}

void from_json(const Json& j, BenchConfig& c) {
  static const char* known[] = {"dataset", "methods", "eraser", "modes", "n_requests", "request_kind",
                                "repetitions", "seed", "train_ratio", "stratified_split", "scratch_requests",
                                "f1_average", "mlp", "guideline_threshold", "k_list", "request_counts", "workers"};
  if (!j.is_object()) throw ConfigError("config must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  try {
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      if (d.contains("sbm")) {
        SbmSpec spec = c.dataset.sbm.value_or(SbmSpec{});
        from_json(d.at("sbm"), spec);
        c.dataset.sbm = spec;
      }
      if (d.contains("node_file")) c.dataset.node_file = d.at("node_file").get<std::string>();
      if (d.contains("edge_file")) c.dataset.edge_file = d.at("edge_file").get<std::string>();
      if (d.contains("snapshot")) c.dataset.snapshot = d.at("snapshot").get<std::string>();
    }
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods")) c.methods.push_back(parse_partition_method(m.get<std::string>()));
    }
    if (j.contains("eraser")) from_json(j.at("eraser"), c.eraser);
    if (j.contains("modes")) {
      c.modes.clear();
      for (const auto& m : j.at("modes")) c.modes.push_back(parse_aggregation_mode(m.get<std::string>()));
    }
    if (j.contains("n_requests")) c.n_requests = j.at("n_requests").get<int>();
    if (j.contains("request_kind")) {
      const auto kind = j.at("request_kind").get<std::string>();
      if (kind != "node" && kind != "edge") throw ConfigError("request_kind must be node or edge");
      c.request_kind = kind == "node" ? RequestKind::kNode : RequestKind::kEdge;
    }
    if (j.contains("repetitions")) c.repetitions = j.at("repetitions").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("train_ratio")) c.train_ratio = j.at("train_ratio").get<double>();
    if (j.contains("stratified_split")) c.stratified_split = j.at("stratified_split").get<bool>();
    if (j.contains("scratch_requests")) c.scratch_requests = j.at("scratch_requests").get<int>();
    if (j.contains("f1_average")) {
      const auto avg = j.at("f1_average").get<std::string>();
      if (avg != "micro" && avg != "macro") throw ConfigError("f1_average must be micro or macro");
      c.f1_average = avg == "micro" ? F1Average::kMicro : F1Average::kMacro;
    }
    if (j.contains("mlp")) from_json(j.at("mlp"), c.mlp);
    if (j.contains("guideline_threshold")) c.guideline_threshold = j.at("guideline_threshold").get<double>();
    if (j.contains("k_list")) c.k_list = j.at("k_list").get<std::vector<int>>();
    if (j.contains("request_counts")) c.request_counts = j.at("request_counts").get<std::vector<int>>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

Report make_report(const BenchConfig& cfg, const UnlearnBenchResult& r) {
  Report rep = base_report("bench-unlearn", cfg);
  Table t{"unlearning_time",
          {"method", "unlearn_seconds_mean", "unlearn_seconds_std", "retrain_seconds_mean", "scratch_seconds_mean",
           "scratch_seconds_std", "speedup", "requests_per_rep", "scratch_timed_per_rep", "scratch_extrapolated",
           "cross_shard_edges", "score_refits", "f1_mean", "f1_std", "audit_passed"},
          {}};
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    t.add_row({to_string(row.method), format_number(row.unlearn_seconds.mean), format_number(row.unlearn_seconds.std),
               format_number(row.retrain_seconds.mean), format_number(row.scratch_seconds.mean),
               format_number(row.scratch_seconds.std), format_number(row.speedup),
               std::to_string(row.requests_per_rep), std::to_string(row.scratch_timed_per_rep),
               row.scratch_extrapolated ? "true" : "false", std::to_string(row.cross_shard_edges),
               std::to_string(row.score_refits), format_number(row.f1_after.mean), format_number(row.f1_after.std),
               row.audit_passed ? "true" : "false"});
    rows.push_back({{"method", to_string(row.method)},
                    {"unlearn_seconds", mean_std_json(row.unlearn_seconds)},
                    {"retrain_seconds", mean_std_json(row.retrain_seconds)},
                    {"scratch_seconds", mean_std_json(row.scratch_seconds)},
                    {"speedup", row.speedup},
                    {"scratch_extrapolated", row.scratch_extrapolated},
                    {"f1", mean_std_json(row.f1_after)},
                    {"audit_passed", row.audit_passed}});
  }
  rep.doc["results"] = rows;
  rep.tables.push_back(std::move(t));
  return rep;
}

Report make_report(const std::string& command, const BenchConfig& cfg, const UtilityResult& r) {
  Report rep = base_report(command, cfg);
  Table summary{"f1_summary", {"variant", "aggregation", "f1_mean", "f1_std", "repetitions"}, {}};
  Json cells = Json::array();
  for (const auto& c : r.cells) {
    const std::string mode = c.mode ? to_string(*c.mode) : "-";
    summary.add_row({c.variant, mode, format_number(c.f1.mean), format_number(c.f1.std),
                     std::to_string(c.f1_per_rep.size())});
    cells.push_back({{"variant", c.variant}, {"aggregation", mode}, {"f1", mean_std_json(c.f1)}, {"per_rep", c.f1_per_rep}});
  }
  Table per_rep{"f1_per_repetition", {"rep", "seed", "variant", "aggregation", "f1", "model_hash"}, {}};
  for (const auto& rr : r.repetitions) {
    if (rr.scratch_f1) {
      per_rep.add_row({std::to_string(rr.rep), std::to_string(rr.seed), "scratch", "-", format_number(*rr.scratch_f1), "-"});
    }
    for (const auto& [method, by_mode] : rr.f1) {
      for (const auto& [mode, f1] : by_mode) {
        per_rep.add_row({std::to_string(rr.rep), std::to_string(rr.seed), to_string(method), to_string(mode),
                         format_number(f1), std::to_string(rr.model_hash.at(method))});
      }
    }
  }
  rep.doc["results"] = cells;
  rep.tables.push_back(std::move(summary));
  rep.tables.push_back(std::move(per_rep));
  return rep;
}

Report make_report(const BenchConfig& cfg, const std::vector<ShardSweepRow>& rows) {
  Report rep = base_report("sweep-shards", cfg);
  Table t{"shard_sweep", {"k", "unlearn_seconds_mean", "unlearn_seconds_std", "f1_mean", "f1_std", "balanced"}, {}};
  for (const auto& r : rows) {
    t.add_row({std::to_string(r.k), format_number(r.unlearn_seconds.mean), format_number(r.unlearn_seconds.std),
               format_number(r.f1.mean), format_number(r.f1.std), r.balanced ? "true" : "false"});
  }
  rep.tables.push_back(std::move(t));
  return rep;
}

Report make_report(const BenchConfig& cfg, const std::vector<RequestSweepRow>& rows) {
  Report rep = base_report("sweep-requests", cfg);
  Table t{"request_sweep", {"removed", "f1_mean", "f1_std", "audit_passed"}, {}};
  for (const auto& r : rows) {
    t.add_row({std::to_string(r.removed), format_number(r.f1.mean), format_number(r.f1.std),
               r.audit_passed ? "true" : "false"});
  }
  rep.tables.push_back(std::move(t));
  return rep;
}

Report make_report(const BenchConfig& cfg, const GuidelineResult& r) {
  Report rep = base_report("guideline", cfg);
  Table t{"guideline", {"rep", "mlp_f1", "gnn_f1", "gap", "recommendation"}, {}};
  for (const auto& row : r.rows) {
    t.add_row({std::to_string(row.rep), format_number(row.mlp_f1), format_number(row.gnn_f1), format_number(row.gap),
               to_string(row.recommendation)});
  }
  rep.doc["recommendation"] = to_string(r.recommendation);
  rep.doc["gap"] = mean_std_json(r.gap);
  rep.doc["threshold"] = cfg.guideline_threshold;
  rep.tables.push_back(std::move(t));
  return rep;
}

Report make_report(const BenchConfig& cfg, const ScoreCorrelation& r) {
  Report rep = base_report("score-corr", cfg);
  Table t{"score_correlation", {"shard", "size", "f1", "alpha"}, {}};
  for (const auto& row : r.rows) {
    t.add_row({std::to_string(row.shard), std::to_string(row.size), format_number(row.f1), format_number(row.alpha)});
  }
  rep.doc["spearman"] = r.spearman;
  rep.tables.push_back(std::move(t));
  return rep;
}

void write_svg_chart(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                     const std::vector<double>& x, const std::vector<ChartSeries>& series, bool scatter) {
  if (x.empty()) throw ConfigError("chart needs at least one point");
  constexpr double W = 640, H = 400, L = 60, R = 150, T = 40, B = 50;
  double xmin = *std::min_element(x.begin(), x.end()), xmax = *std::max_element(x.begin(), x.end());
  double ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : series) {
    if (s.y.size() != x.size()) throw ConfigError("series '" + s.name + "' length differs from x");
    for (double v : s.y) {
      if (std::isfinite(v)) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
    }
  }
  if (!std::isfinite(ymin)) ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  auto px = [&](double v) { return L + (v - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double v) { return H - B - (v - ymin) / (ymax - ymin) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title) << "</text>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0, yv = ymin + (ymax - ymin) * i / 4.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << format_number(std::round(xv * 1000) / 1000) << "</text>\n";
    out << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << format_number(std::round(yv * 1000) / 1000) << "</text>\n";
  }
  out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << xml_escape(x_label) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % std::size(colors)];
    std::ostringstream pts;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!std::isfinite(series[s].y[i])) continue;
      pts << px(x[i]) << ',' << py(series[s].y[i]) << ' ';
      out << "<circle cx=\"" << px(x[i]) << "\" cy=\"" << py(series[s].y[i]) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    if (!scatter) out << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"" << pts.str() << "\"/>\n";
    out << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (s + 1) << "\" fill=\"" << color << "\">" << xml_escape(series[s].name) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace gerk
