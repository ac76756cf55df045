#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "gerk/gnn.hpp"
#include "gerk/types.hpp"

namespace gerk {

/// One posterior matrix per shard, all over the same ordered query list.
using ShardPosteriors = std::vector<PosteriorMatrix>;

/// Throws InvariantError unless all matrices share a shape and are row-stochastic.
void validate(const ShardPosteriors& sp);

/// Sum of alpha_i * P_i accumulated in shard order.
PosteriorMatrix weighted_sum(const ShardPosteriors& sp, const Vector& alpha);

PosteriorMatrix mean_aggr(const ShardPosteriors& sp);

/// Per-shard argmax followed by the mode; ties go to the smallest class id.
LabelList maj_aggr(const ShardPosteriors& sp);

LabelList weighted_predict(const ShardPosteriors& sp, const Vector& alpha);

enum class AggregationMode { kMean, kMajority, kOptimal };

std::string to_string(AggregationMode m);
AggregationMode parse_aggregation_mode(const std::string& s);

struct OptAggrConfig {
  double lambda = 1e-3;
  double learning_rate = 0.1;
  int epochs = 100;
  double subset_frac = 0.1;
  std::uint64_t seed = 0;
  bool clamp = true;  // project negative pre-scores to 0 after each step

  void validate() const;
};

struct ImportanceScores {
  Vector alpha;
  Vector pre_scores;  // unnormalised parameters behind alpha
  double lambda = 0.0;
  double subset_frac = 0.0;
  NodeList score_train_nodes;  // sorted
  std::uint64_t seed = 0;
  int epochs_run = 0;
  std::vector<double> loss_trace;  // initial loss, then one entry per epoch

  bool contains(NodeId u) const;
};

/// Throws InvariantError unless alpha has m nonnegative entries summing to 1.
void validate(const ImportanceScores& s, int num_shards);

/// Seeded uniform sample of max(1, round(frac * |nodes|)) nodes, sorted.
NodeList sample_score_nodes(std::span<const NodeId> train_nodes, double frac, std::uint64_t seed);

/// Fits alpha on cached shard posteriors of the score-training nodes.
/// `on_epoch` (optional) sees alpha after every epoch.
ImportanceScores fit_importance_scores(const ShardPosteriors& sp, std::span<const Label> labels,
                                       const OptAggrConfig& cfg,
                                       const std::function<void(int, const Vector&)>& on_epoch = {});

/// Objective value for a given alpha on cached posteriors, without the regulariser.
double aggregation_loss(const ShardPosteriors& sp, std::span<const Label> labels, const Vector& alpha);

/// Samples score nodes from `train_nodes`, computes each model's posteriors
/// on `g` and fits alpha.
ImportanceScores opt_aggr_train(std::span<const GnnModel> shard_models, const Graph& g,
                                std::span<const NodeId> train_nodes, const OptAggrConfig& cfg);

void save_scores(const ImportanceScores& s, const std::filesystem::path& path);
ImportanceScores load_scores(const std::filesystem::path& path);

}  // namespace gerk
