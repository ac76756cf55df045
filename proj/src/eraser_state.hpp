#pragma once

#include <memory>
#include <mutex>
#include <shared_mutex>
#include <vector>

#include "gerk/eraser.hpp"

namespace gerk {

/// Current graph over every remaining node with id maps and roles.
struct GraphView {
  Graph graph;                 // rows in ascending original id
  NodeList original;           // row -> original id
  NodeList row;                // original id -> row, -1 once deleted
  std::vector<char> train;     // per row
  std::vector<ShardId> shard;  // per row, -1 for test nodes
};

/// Score-training posteriors per shard, rows aligned with `nodes`.
struct ScoreCache {
  NodeList nodes;
  std::vector<PosteriorMatrix> posteriors;
  std::vector<char> dirty;
};

struct Eraser::State {
  EraserConfig cfg;
  ShardAssignment initial_assignment;
  std::size_t initial_train_count = 0;
  double build_seconds = 0.0;

  mutable std::shared_mutex mu;  // guards the published snapshot below
  std::mutex writer;             // serializes requests

  std::shared_ptr<const GraphView> view;
  std::vector<std::shared_ptr<const Shard>> shards;
  std::shared_ptr<const ImportanceScores> scores;  // null without OptAggr
  std::vector<UnlearnRequest> log;

  ScoreCache cache;  // touched by the writer only

  struct Snapshot {
    std::shared_ptr<const GraphView> view;
    std::vector<std::shared_ptr<const Shard>> shards;
    std::shared_ptr<const ImportanceScores> scores;
  };
  Snapshot snapshot() const {
    std::shared_lock lock(mu);
    return {view, shards, scores};
  }
};

namespace detail {

/// Rows of `queries` (original ids) in the snapshot, throwing LookupError on unknown ids.
NodeList query_rows(const GraphView& view, std::span<const NodeId> queries);

/// Posteriors of shard i for the given view rows under the configured policy.
PosteriorMatrix shard_rows(const GraphView& view, const Shard& shard, int i, std::span<const NodeId> rows,
                           InferencePolicy policy);

GraphView make_view(const Graph& g, NodeList original, std::size_t original_count, const std::vector<char>& train,
                    const std::vector<ShardId>& shard);

}  // namespace detail

}  // namespace gerk
