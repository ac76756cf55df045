#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gerk/graph.hpp"
#include "gerk/types.hpp"

namespace gerk {

enum class PartitionMethod { kRandom, kBlpa, kBekm };

std::string to_string(PartitionMethod m);
PartitionMethod parse_partition_method(const std::string& s);

/// How one BLPA iteration turns preferences into an assignment.
enum class BlpaScan {
  // Every node is re-placed from empty shards in descending neighbor-count
  // order over all k node-shard pairs. Never deadlocks when k*delta >= n.
  kRebuild,
  // Only dst != src profiles are scanned and accepted moves update live
  // shard sizes. Cannot move anything while every shard is full.
  kMove,
};

/// How BEKM picks its starting centroids.
enum class BekmInit {
  kSample,    // k distinct node embeddings drawn uniformly
  kPlusPlus,  // k-means++ (distance-squared weighted draws)
};

std::string to_string(BekmInit i);
BekmInit parse_bekm_init(const std::string& s);

struct PartitionConfig {
  PartitionMethod method = PartitionMethod::kBlpa;
  int k = 10;
  double gamma = 1.0;  // delta = ceil(gamma * n / k)
  int max_iterations = 30;
  std::uint64_t seed = 0;
  double bekm_tol = 1e-6;
  BekmInit bekm_init = BekmInit::kSample;
  BlpaScan blpa_scan = BlpaScan::kRebuild;
  bool blpa_strict_improve = false;

  void validate() const;
  NodeId delta_for(NodeId n) const;
};

/// Total map from node id to shard id for k shards.
struct ShardAssignment {
  int k = 0;
  NodeId delta = 0;
  PartitionMethod method = PartitionMethod::kRandom;
  std::uint64_t seed = 0;
  std::vector<ShardId> assign;
  int iterations_run = 0;
  bool converged = false;
  int reseeded_centroids = 0;  // BEKM empty-shard repairs

  NodeId num_nodes() const { return static_cast<NodeId>(assign.size()); }
  std::vector<NodeId> shard_sizes() const;
  /// Members of every shard in ascending node order.
  std::vector<NodeList> shards() const;
};

/// Throws InvariantError unless every node sits in a shard in [0,k) and
/// no shard exceeds delta.
void validate(const ShardAssignment& a, NodeId expected_nodes);

/// Number of edges whose endpoints share a shard.
std::size_t within_shard_edges(const Graph& g, const std::vector<ShardId>& assign);

ShardAssignment random_partition(NodeId n, int k, std::uint64_t seed);

/// One accepted BLPA move, recorded when `moves` is requested.
struct BlpaMove {
  int iteration;
  NodeId node;
  ShardId src;
  ShardId dst;
  int xi_dst;
  int xi_src;
};

ShardAssignment blpa(const Graph& g, const PartitionConfig& cfg,
                     const std::optional<std::vector<ShardId>>& initial = std::nullopt,
                     std::vector<BlpaMove>* moves = nullptr);

/// Node embeddings for BEKM, one row per node.
using EmbeddingSet = Matrix;

ShardAssignment bekm(const EmbeddingSet& embeddings, const PartitionConfig& cfg);

/// Dispatches on cfg.method. `embeddings` is only read for BEKM.
ShardAssignment partition(const Graph& g, const EmbeddingSet* embeddings, const PartitionConfig& cfg);

/// Adjusted Rand index between two labelings of the same nodes.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

void save_assignment(const ShardAssignment& a, const std::filesystem::path& path);
ShardAssignment load_assignment(const std::filesystem::path& path);

}  // namespace gerk
