#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gerk/types.hpp"

namespace gerk {

/// Undirected, simple, attributed graph with dense node ids 0..n-1.
///
/// Neighbor lists are kept sorted ascending, which makes every derived
/// graph (induced subgraph, deletion result) canonical: two graphs built
/// from the same node set compare equal member by member.
struct Graph {
  std::vector<NodeList> adj;
  Matrix features;  // n x d_X
  LabelList labels;
  int num_classes = 0;

  NodeId num_nodes() const { return static_cast<NodeId>(adj.size()); }
  Eigen::Index feature_dim() const { return features.cols(); }
  std::size_t num_edges() const;
  std::size_t degree(NodeId u) const { return adj[static_cast<std::size_t>(u)].size(); }
  const NodeList& neighbors(NodeId u) const { return adj[static_cast<std::size_t>(u)]; }
  bool has_edge(NodeId u, NodeId v) const;
  bool contains(NodeId u) const { return u >= 0 && u < num_nodes(); }

  friend bool operator==(const Graph& a, const Graph& b);
};

using Edge = std::pair<NodeId, NodeId>;

struct EdgeCleanup {
  std::size_t self_loops = 0;
  std::size_t duplicates = 0;
};

/// Builds a graph from an arbitrary edge list. Edges are symmetrized;
/// self-loops and repeated edges are dropped and counted in `cleanup`.
Graph make_graph(Matrix features, LabelList labels, int num_classes,
                 std::span<const Edge> edges, EdgeCleanup* cleanup = nullptr);

/// Throws InvariantError on asymmetric adjacency, self-loops, duplicate
/// neighbors, out-of-range labels or a feature matrix of the wrong height.
void validate(const Graph& g);

/// FNV-1a over adjacency, feature bytes, labels and class count.
std::uint64_t content_hash(const Graph& g);

/// A graph derived from a parent together with the id maps in both directions.
struct Subgraph {
  Graph graph;
  NodeList to_parent;    // new id -> parent id
  NodeList from_parent;  // parent id -> new id, -1 when dropped
};

/// Keeps exactly `nodes` (re-indexed in ascending parent-id order) and
/// every edge of `g` with both endpoints in the set.
Subgraph induced_subgraph(const Graph& g, std::span<const NodeId> nodes);

/// Removes u's feature row, label and incident edges.
Subgraph delete_node(const Graph& g, NodeId u);

/// Removes the undirected edge (u, v). Node rows are untouched.
Graph delete_edge(const Graph& g, NodeId u, NodeId v);

struct NodeSplit {
  NodeList train_nodes;  // sorted
  NodeList test_nodes;   // sorted
  std::uint64_t seed = 0;
};

/// Uniform random train/test split with |train| = round(ratio * n).
/// `stratified` rounds per class instead.
NodeSplit split_train_test(const Graph& g, double ratio, std::uint64_t seed,
                           bool stratified = false);

/// How SBM labels relate to the blocks.
enum class SbmLabelRule {
  // label = block id, features centred on the block centroid
  kBlock,
  // labels uniform over num_classes, features centred on the label centroid;
  // the block structure carries no label signal
  kUniform,
};

std::string to_string(SbmLabelRule r);
SbmLabelRule parse_sbm_label_rule(const std::string& s);

/// Desk-scale stochastic block model test bed.
struct SbmSpec {
  std::vector<NodeId> blocks;
  double p_in = 0.0;
  double p_out = 0.0;
  int feature_dim = 16;
  SbmLabelRule label_rule = SbmLabelRule::kBlock;
  int num_classes = 0;  // ignored for kBlock; 0 means #blocks
  // Each block is cut into `sub_blocks` contiguous communities. Pairs in one
  // community link with p_in, other pairs of the same block with p_mix.
  // Every community also gets its own feature offset of this scale.
  int sub_blocks = 1;
  double p_mix = 0.0;
  double sub_block_feature_scale = 0.0;
  double feature_noise = 1.0;
  double centroid_scale = 1.0;
  std::uint64_t seed = 0;
};

void validate(const SbmSpec& spec);
Graph generate_sbm(const SbmSpec& spec);

struct GraphLoadResult {
  Graph graph;
  EdgeCleanup cleanup;
};

/// Reads the node CSV (`id,label,f0,...`) and whitespace edge list.
GraphLoadResult load_graph(const std::filesystem::path& node_file,
                           const std::filesystem::path& edge_file);

/// Writes the node CSV and edge list that `load_graph` reads back.
void write_graph_files(const Graph& g, const std::filesystem::path& node_file,
                       const std::filesystem::path& edge_file);

inline constexpr const char* kGraphFormat = "gerk-graph-v1";

/// Snapshot container. `.json` paths are written as text, anything else as CBOR.
void save_graph(const Graph& g, const std::filesystem::path& path);
Graph load_graph_snapshot(const std::filesystem::path& path);

}  // namespace gerk
