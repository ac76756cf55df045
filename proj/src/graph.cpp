#include "gerk/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "gerk/error.hpp"
#include "gerk/hash.hpp"

namespace gerk {

std::size_t Graph::num_edges() const {
  std::size_t twice = 0;
  for (const auto& nbrs : adj) twice += nbrs.size();
  return twice / 2;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (!contains(u) || !contains(v)) return false;
  const auto& nbrs = neighbors(u);
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

bool operator==(const Graph& a, const Graph& b) {
  return a.num_classes == b.num_classes && a.adj == b.adj && a.labels == b.labels &&
         a.features.rows() == b.features.rows() && a.features.cols() == b.features.cols() &&
         a.features == b.features;
}

Graph make_graph(Matrix features, LabelList labels, int num_classes,
                 std::span<const Edge> edges, EdgeCleanup* cleanup) {
  const auto n = static_cast<NodeId>(labels.size());
  if (features.rows() != n) {
    throw InvariantError("feature matrix has " + std::to_string(features.rows()) +
                         " rows for " + std::to_string(n) + " nodes");
  }
  Graph g;
  g.features = std::move(features);
  g.labels = std::move(labels);
  g.num_classes = num_classes;
  g.adj.assign(static_cast<std::size_t>(n), {});

  EdgeCleanup local;
  for (const auto& [u, v] : edges) {
    if (u < 0 || u >= n || v < 0 || v >= n) {
      throw LookupError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                        ") references an unknown node");
    }
    if (u == v) {
      ++local.self_loops;
      continue;
    }
    g.adj[static_cast<std::size_t>(u)].push_back(v);
    g.adj[static_cast<std::size_t>(v)].push_back(u);
  }
  std::size_t directed_dups = 0;
  for (auto& nbrs : g.adj) {
    std::sort(nbrs.begin(), nbrs.end());
    const auto last = std::unique(nbrs.begin(), nbrs.end());
    directed_dups += static_cast<std::size_t>(nbrs.end() - last);
    nbrs.erase(last, nbrs.end());
  }
  local.duplicates = directed_dups / 2;
  if (cleanup) *cleanup = local;
  validate(g);
  return g;
}

void validate(const Graph& g) {
  const NodeId n = g.num_nodes();
  if (g.features.rows() != n) throw InvariantError("feature rows do not match node count");
  if (static_cast<NodeId>(g.labels.size()) != n) {
    throw InvariantError("label count does not match node count");
  }
  for (NodeId u = 0; u < n; ++u) {
    const Label y = g.labels[static_cast<std::size_t>(u)];
    if (y < 0 || y >= g.num_classes) {
      throw InvariantError("label " + std::to_string(y) + " of node " + std::to_string(u) +
                           " outside [0, " + std::to_string(g.num_classes) + ")");
    }
    const auto& nbrs = g.neighbors(u);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      const NodeId v = nbrs[i];
      if (!g.contains(v)) throw InvariantError("neighbor id out of range");
      if (v == u) throw InvariantError("self-loop at node " + std::to_string(u));
      if (i > 0 && nbrs[i - 1] >= v) {
        throw InvariantError("neighbor list of " + std::to_string(u) +
                             " is unsorted or has duplicates");
      }
      if (!g.has_edge(v, u)) {
        throw InvariantError("asymmetric edge " + std::to_string(u) + "->" + std::to_string(v));
      }
    }
  }
}

std::uint64_t content_hash(const Graph& g) {
  Fnv1a h;
  h.add_value(g.num_nodes());
  h.add_value(g.num_classes);
  h.add_value(g.features.cols());
  for (const auto& nbrs : g.adj) {
    h.add_value(nbrs.size());
    h.add(std::span<const NodeId>(nbrs));
  }
  h.add(g.features.data(), static_cast<std::size_t>(g.features.size()) * sizeof(Scalar));
  h.add(std::span<const Label>(g.labels));
  return h.value();
}

Subgraph induced_subgraph(const Graph& g, std::span<const NodeId> nodes) {
  const NodeId n = g.num_nodes();
  Subgraph sub;
  sub.from_parent.assign(static_cast<std::size_t>(n), -1);
  for (NodeId u : nodes) {
    if (!g.contains(u)) throw LookupError("unknown node id " + std::to_string(u));
    if (sub.from_parent[static_cast<std::size_t>(u)] != -1) {
      throw ConfigError("node " + std::to_string(u) + " listed twice");
    }
    sub.from_parent[static_cast<std::size_t>(u)] = 0;
  }
  for (NodeId u = 0; u < n; ++u) {
    if (sub.from_parent[static_cast<std::size_t>(u)] != -1) {
      sub.from_parent[static_cast<std::size_t>(u)] = static_cast<NodeId>(sub.to_parent.size());
      sub.to_parent.push_back(u);
    }
  }

  const auto m = static_cast<NodeId>(sub.to_parent.size());
  Graph& out = sub.graph;
  out.num_classes = g.num_classes;
  out.adj.resize(static_cast<std::size_t>(m));
  out.labels.resize(static_cast<std::size_t>(m));
  out.features.resize(m, g.feature_dim());
  for (NodeId i = 0; i < m; ++i) {
    const NodeId p = sub.to_parent[static_cast<std::size_t>(i)];
    out.labels[static_cast<std::size_t>(i)] = g.labels[static_cast<std::size_t>(p)];
    out.features.row(i) = g.features.row(p);
    auto& nbrs = out.adj[static_cast<std::size_t>(i)];
    for (NodeId v : g.neighbors(p)) {
      const NodeId mapped = sub.from_parent[static_cast<std::size_t>(v)];
      if (mapped >= 0) nbrs.push_back(mapped);
    }
    // Parent lists are sorted and the map is monotone, so nbrs stays sorted.
  }
  return sub;
}

Subgraph delete_node(const Graph& g, NodeId u) {
  if (!g.contains(u)) throw LookupError("cannot delete unknown node " + std::to_string(u));
  NodeList keep;
  keep.reserve(static_cast<std::size_t>(g.num_nodes()) - 1);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (v != u) keep.push_back(v);
  }
  return induced_subgraph(g, keep);
}

Graph delete_edge(const Graph& g, NodeId u, NodeId v) {
  if (!g.has_edge(u, v)) {
    throw LookupError("edge (" + std::to_string(u) + ", " + std::to_string(v) + ") does not exist");
  }
  Graph out = g;
  auto erase = [&](NodeId a, NodeId b) {
    auto& nbrs = out.adj[static_cast<std::size_t>(a)];
    nbrs.erase(std::lower_bound(nbrs.begin(), nbrs.end(), b));
  };
  erase(u, v);
  erase(v, u);
  return out;
}

NodeSplit split_train_test(const Graph& g, double ratio, std::uint64_t seed, bool stratified) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw ConfigError("split ratio must lie in (0, 1), got " + std::to_string(ratio));
  }
  std::mt19937_64 rng(seed);
  NodeSplit split;
  split.seed = seed;

  auto take = [&](NodeList pool) {
    std::shuffle(pool.begin(), pool.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(pool.size())));
    split.train_nodes.insert(split.train_nodes.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test_nodes.insert(split.test_nodes.end(), pool.begin() + static_cast<std::ptrdiff_t>(n_train), pool.end());
  };

  if (stratified) {
    std::vector<NodeList> by_class(static_cast<std::size_t>(std::max(g.num_classes, 0)));
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
      by_class[static_cast<std::size_t>(g.labels[static_cast<std::size_t>(u)])].push_back(u);
    }
    for (auto& pool : by_class) take(std::move(pool));
  } else {
    NodeList all(static_cast<std::size_t>(g.num_nodes()));
    std::iota(all.begin(), all.end(), 0);
    take(std::move(all));
  }
  std::sort(split.train_nodes.begin(), split.train_nodes.end());
  std::sort(split.test_nodes.begin(), split.test_nodes.end());
  return split;
}

}  // namespace gerk
