#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gerk/aggregation.hpp"
#include "gerk/gnn.hpp"
#include "gerk/graph.hpp"
#include "gerk/partition.hpp"

namespace gerk {

/// Which neighbors a shard model sees when scoring a query node w.
enum class InferencePolicy {
  // Graph induced on the shard's training nodes, w, and w's non-training neighbors.
  kShardLocal,
  // w's ego network in the full remaining graph, identical for every shard.
  kGlobalEgo,
};

std::string to_string(InferencePolicy p);
InferencePolicy parse_inference_policy(const std::string& s);

struct EraserConfig {
  PartitionConfig partition;
  GnnConfig gnn;
  OptAggrConfig opt_aggr;
  bool fit_scores = true;  // false: only mean / majority prediction is available
  InferencePolicy inference = InferencePolicy::kShardLocal;
  int threads = 0;  // 0 uses every hardware thread

  void validate() const;
};

enum class RequestKind { kNode, kEdge };

struct UnlearnRequest {
  RequestKind kind = RequestKind::kNode;
  NodeId u = -1;
  NodeId v = -1;  // edge requests only

  static UnlearnRequest node(NodeId u) { return {RequestKind::kNode, u, -1}; }
  static UnlearnRequest edge(NodeId u, NodeId v) { return {RequestKind::kEdge, u, v}; }
  friend bool operator==(const UnlearnRequest&, const UnlearnRequest&) = default;
};

struct UnlearnReport {
  UnlearnRequest request;
  std::optional<ShardId> affected_shard;
  double retrain_seconds = 0.0;
  bool scores_retrained = false;
  double scores_retrain_seconds = 0.0;
  double total_seconds = 0.0;
};

struct AuditCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct AuditReport {
  std::vector<AuditCheck> checks;
  bool passed() const;
  std::string summary() const;
};

/// What a shard model was fitted on, captured at training time.
struct TrainingRecord {
  std::uint64_t graph_hash = 0;
  std::uint64_t param_hash = 0;
  std::uint64_t seed = 0;
};

struct Shard {
  NodeList members;  // original node ids, ascending
  Graph graph;       // training graph induced on `members`, same order
  GnnModel model;
  bool stub = false;  // empty shard: uniform posterior, no model
  std::uint64_t seed = 0;
  TrainingRecord record;
};

/// Seed of shard i's model, derived from the base GNN seed.
std::uint64_t shard_seed(std::uint64_t base, int shard);

/// Trains one shard model exactly as build and unlearn do.
Shard train_shard(NodeList members, Graph graph, const GnnConfig& cfg, std::uint64_t seed);

/// Posterior of every query row of `g` computed on the graph induced by the
/// nodes with allowed[v] != 0, the query itself and its non-training
/// neighbors. Each query is evaluated on its own (layers + 1)-hop ball, so
/// queries never see each other unless that rule admits them.
PosteriorMatrix local_posteriors(const GnnModel& model, const Graph& g, std::span<const char> is_train,
                                 std::span<const char> allowed, std::span<const NodeId> queries);

/// Posterior of every query row of `g` computed on its ego network in `g`.
PosteriorMatrix ego_posteriors(const GnnModel& model, const Graph& g, std::span<const NodeId> queries);

/// Sharded training system supporting exact node and edge unlearning.
///
/// Node ids in the public interface are those of the graph passed to
/// build() and stay valid after deletions. Requests are serialized;
/// predictions may run concurrently with each other and with a request,
/// reading a consistent snapshot.
class Eraser {
 public:
  Eraser(Eraser&&) noexcept;
  Eraser& operator=(Eraser&&) noexcept;
  ~Eraser();

  /// Partitions the training nodes (unless `preset` is given), trains every
  /// shard and fits importance scores when configured.
  static Eraser build(const Graph& g, const NodeSplit& split, const EraserConfig& cfg,
                      const ShardAssignment* preset = nullptr);

  UnlearnReport unlearn(const UnlearnRequest& req);

  ShardPosteriors shard_posteriors(std::span<const NodeId> queries) const;
  LabelList predict(std::span<const NodeId> queries, AggregationMode mode) const;
  /// Uses `alpha` instead of the fitted scores.
  LabelList predict_weighted(std::span<const NodeId> queries, const Vector& alpha) const;

  AuditReport audit() const;

  const EraserConfig& config() const;
  int num_shards() const;
  std::shared_ptr<const Shard> shard(int i) const;
  std::optional<ImportanceScores> scores() const;
  /// Current training graph; rows follow ascending original id.
  Subgraph training_graph() const;
  /// Current graph over every remaining node, train and test.
  Subgraph current_graph() const;
  NodeList training_nodes() const;
  NodeList test_nodes() const;
  /// -1 for test or deleted nodes.
  ShardId shard_of(NodeId u) const;
  std::vector<UnlearnRequest> deletion_log() const;
  const ShardAssignment& initial_assignment() const;
  double build_seconds() const;

  void save(const std::filesystem::path& dir) const;
  static Eraser load(const std::filesystem::path& dir);

  /// Replaces shard i's model with one fitted on a different graph while
  /// leaving the shard graph untouched. Only for exercising audit().
  void inject_stale_model_for_testing(int i);

  struct State;

 private:
  explicit Eraser(std::unique_ptr<State> state);
  std::unique_ptr<State> s_;
};

}  // namespace gerk
