#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>

#include "gerk/error.hpp"
#include "gerk/graph.hpp"
#include "json_util.hpp"

namespace gerk {
namespace detail {

Json matrix_to_json(const Matrix& m) {
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  // Row-major storage, so data() is already in row-major order.
  j["data"] = std::vector<Scalar>(m.data(), m.data() + m.size());
  return j;
}

Matrix matrix_from_json(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<Scalar>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw ConfigError("matrix payload size does not match its shape");
  }
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

void write_document(const std::filesystem::path& path, const Json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (path.extension() == ".json") {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
  } else {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    const auto bytes = Json::to_cbor(doc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
}

Json read_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    if (path.extension() == ".json") return Json::parse(in);
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return Json::from_cbor(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void expect_format(const Json& doc, const std::string& tag, const std::filesystem::path& path) {
  if (!doc.is_object() || doc.value("format", std::string{}) != tag) {
    throw ConfigError(path.string() + ": expected a " + tag + " container");
  }
}

}  // namespace detail

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail_at(const std::filesystem::path& file, std::size_t line, const std::string& what) {
  throw ConfigError(file.string() + ":" + std::to_string(line) + ": " + what);
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

GraphLoadResult load_graph(const std::filesystem::path& node_file,
                           const std::filesystem::path& edge_file) {
  std::ifstream nodes_in(node_file);
  if (!nodes_in) throw ConfigError("cannot open node file " + node_file.string());

  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(nodes_in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  {
    const auto header = split_csv(trim(line));
    if (header.size() < 2 || trim(header[0]) != "id" || trim(header[1]) != "label") {
      fail_at(node_file, line_no, "header must start with id,label");
    }
    width = header.size();
  }

  struct Row {
    NodeId id;
    Label label;
    std::vector<double> feats;
  };
  std::vector<Row> rows;
  while (std::getline(nodes_in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto cells = split_csv(body);
    if (cells.size() != width) {
      fail_at(node_file, line_no, "expected " + std::to_string(width) + " columns, got " +
                                      std::to_string(cells.size()));
    }
    Row row;
    if (!parse_number(cells[0], row.id) || row.id < 0) fail_at(node_file, line_no, "bad node id");
    if (!parse_number(cells[1], row.label)) fail_at(node_file, line_no, "bad label");
    if (row.label < 0) fail_at(node_file, line_no, "label out of range");
    row.feats.resize(width - 2);
    for (std::size_t j = 2; j < width; ++j) {
      if (!parse_number(cells[j], row.feats[j - 2])) {
        fail_at(node_file, line_no, "bad feature value in column " + std::to_string(j));
      }
    }
    rows.push_back(std::move(row));
  }

  const auto n = static_cast<NodeId>(rows.size());
  Matrix features(n, static_cast<Eigen::Index>(width - 2));
  LabelList labels(static_cast<std::size_t>(n), -1);
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  int num_classes = 0;
  for (const auto& row : rows) {
    if (row.id >= n || seen[static_cast<std::size_t>(row.id)]) {
      throw ConfigError(node_file.string() + ": node ids must be exactly 0.." + std::to_string(n - 1) +
                        " (offending id " + std::to_string(row.id) + ")");
    }
    seen[static_cast<std::size_t>(row.id)] = true;
    labels[static_cast<std::size_t>(row.id)] = row.label;
    for (std::size_t j = 0; j < row.feats.size(); ++j) features(row.id, static_cast<Eigen::Index>(j)) = row.feats[j];
    num_classes = std::max(num_classes, row.label + 1);
  }

  std::ifstream edges_in(edge_file);
  if (!edges_in) throw ConfigError("cannot open edge file " + edge_file.string());
  std::vector<Edge> edges;
  line_no = 0;
  while (std::getline(edges_in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::istringstream fields{std::string(body)};
    std::string a, b, extra;
    if (!(fields >> a >> b) || (fields >> extra)) fail_at(edge_file, line_no, "expected 'u v'");
    NodeId u = 0, v = 0;
    if (!parse_number(std::string_view(a), u) || !parse_number(std::string_view(b), v)) {
      fail_at(edge_file, line_no, "bad node id");
    }
    if (u < 0 || u >= n || v < 0 || v >= n) {
      fail_at(edge_file, line_no, "edge references node absent from the node file");
    }
    edges.emplace_back(u, v);
  }

  GraphLoadResult result;
  result.graph = make_graph(std::move(features), std::move(labels), num_classes, edges, &result.cleanup);
  return result;
}

void write_graph_files(const Graph& g, const std::filesystem::path& node_file,
                       const std::filesystem::path& edge_file) {
  for (const auto& p : {node_file, edge_file}) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  }
  std::ofstream nodes(node_file);
  if (!nodes) throw Error("cannot write " + node_file.string());
  nodes << "id,label";
  for (Eigen::Index j = 0; j < g.feature_dim(); ++j) nodes << ",f" << j;
  nodes << '\n';
  nodes.precision(17);
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    nodes << u << ',' << g.labels[static_cast<std::size_t>(u)];
    for (Eigen::Index j = 0; j < g.feature_dim(); ++j) nodes << ',' << g.features(u, j);
    nodes << '\n';
  }
  std::ofstream edges(edge_file);
  if (!edges) throw Error("cannot write " + edge_file.string());
  edges << "# u v\n";
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    for (NodeId v : g.neighbors(u)) {
      if (u < v) edges << u << ' ' << v << '\n';
    }
  }
}

void save_graph(const Graph& g, const std::filesystem::path& path) {
  detail::Json doc;
  doc["format"] = kGraphFormat;
  doc["n"] = g.num_nodes();
  doc["C"] = g.num_classes;
  doc["d_X"] = g.feature_dim();
  doc["adjacency"] = g.adj;
  doc["X"] = detail::matrix_to_json(g.features);
  doc["y"] = g.labels;
  detail::write_document(path, doc);
}

Graph load_graph_snapshot(const std::filesystem::path& path) {
  const auto doc = detail::read_document(path);
  detail::expect_format(doc, kGraphFormat, path);
  Graph g;
  try {
    g.num_classes = doc.at("C").get<int>();
    g.adj = doc.at("adjacency").get<std::vector<NodeList>>();
    g.features = detail::matrix_from_json(doc.at("X"));
    g.labels = doc.at("y").get<LabelList>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (g.num_nodes() != doc.at("n").get<NodeId>() || g.feature_dim() != doc.at("d_X").get<Eigen::Index>()) {
    throw ConfigError(path.string() + ": header does not match payload");
  }
  validate(g);
  return g;
}

}  // namespace gerk
