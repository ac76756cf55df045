#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "gerk/graph.hpp"

namespace gerk::test {

// Feature rows default to node-specific values so nodes are distinguishable.
inline Graph graph_from_edges(NodeId n, const std::vector<Edge>& edges, int num_classes = 2, int dim = 2) {
  Matrix x(n, dim);
  LabelList y(static_cast<std::size_t>(n));
  for (NodeId u = 0; u < n; ++u) {
    for (int j = 0; j < dim; ++j) x(u, j) = 0.1 * (u + 1) + 0.01 * j;
    y[static_cast<std::size_t>(u)] = u % num_classes;
  }
  return make_graph(std::move(x), std::move(y), num_classes, edges);
}

inline Graph path_graph(NodeId n) {
  std::vector<Edge> e;
  for (NodeId u = 0; u + 1 < n; ++u) e.emplace_back(u, u + 1);
  return graph_from_edges(n, e);
}

inline Graph complete_graph(NodeId n) {
  std::vector<Edge> e;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) e.emplace_back(u, v);
  }
  return graph_from_edges(n, e);
}

// Seeded Erdos-Renyi graph with Gaussian features and uniform labels.
inline Graph random_graph(NodeId n, double p, int num_classes, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Edge> e;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (unit(rng) < p) e.emplace_back(u, v);
    }
  }
  Matrix x(n, dim);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);
  LabelList y(static_cast<std::size_t>(n));
  std::uniform_int_distribution<int> cls(0, num_classes - 1);
  for (auto& l : y) l = cls(rng);
  return make_graph(std::move(x), std::move(y), num_classes, e);
}

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("gerk_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace gerk::test
