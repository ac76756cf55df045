#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gerk/aggregation.hpp"
#include "gerk/eraser.hpp"
#include "gerk/metrics.hpp"
#include "gerk/mlp.hpp"

namespace gerk {

/// Where a benchmark graph comes from. Exactly one source must be set.
struct DatasetSource {
  std::optional<SbmSpec> sbm;  // regenerated per repetition with seed + rep
  std::filesystem::path node_file;
  std::filesystem::path edge_file;
  std::filesystem::path snapshot;

  Graph load(int repetition) const;
  std::string describe() const;
};

struct BenchConfig {
  DatasetSource dataset;
  std::vector<PartitionMethod> methods{PartitionMethod::kRandom, PartitionMethod::kBlpa, PartitionMethod::kBekm};
  EraserConfig eraser;
  std::vector<AggregationMode> modes{AggregationMode::kOptimal};
  int n_requests = 100;
  RequestKind request_kind = RequestKind::kNode;
  int repetitions = 10;
  std::uint64_t seed = 0;
  double train_ratio = 0.8;
  bool stratified_split = false;
  int scratch_requests = 10;  // requests whose scratch retrain is actually timed
  F1Average f1_average = F1Average::kMicro;
  MlpConfig mlp;
  double guideline_threshold = 0.03;
  std::vector<int> k_list{2, 5, 10, 20, 50};
  std::vector<int> request_counts{0, 1, 10, 50, 100};
  int workers = 1;  // repetitions evaluated concurrently

  void validate() const;
  /// Seed used by every random choice of repetition `rep`.
  std::uint64_t repetition_seed(int rep) const { return seed + static_cast<std::uint64_t>(rep); }
  /// Eraser config of repetition `rep` with the given partition method.
  EraserConfig eraser_for(int rep, PartitionMethod method) const;
};

/// Graph and split of one repetition.
struct Workload {
  Graph graph;
  NodeSplit split;
};

Workload make_workload(const BenchConfig& cfg, int rep);

/// Labels of `nodes` in `g`.
LabelList labels_of(const Graph& g, std::span<const NodeId> nodes);

/// Scratch baseline: one model on the whole training graph.
struct ScratchModel {
  GnnModel model;
  double train_seconds = 0.0;
};

ScratchModel train_scratch(const Graph& g_train, const GnnConfig& cfg);

/// Scratch test predictions under the same inference policy as the shards
/// (the whole training set behaves as one shard).
LabelList scratch_predict(const GnnModel& model, const Graph& g, std::span<const char> is_train,
                          std::span<const NodeId> queries, InferencePolicy policy);

/// Seeded sample of distinct requests over the current training graph.
std::vector<UnlearnRequest> sample_requests(const Eraser& eraser, RequestKind kind, int count, std::uint64_t seed);

// --- bench-unlearn ----------------------------------------------------------

struct UnlearnTimingRow {
  PartitionMethod method;
  MeanStd unlearn_seconds;  // per request, including score refits
  MeanStd retrain_seconds;
  MeanStd scratch_seconds;  // per timed scratch retrain
  double speedup = 0.0;     // scratch mean / unlearn mean
  int requests_per_rep = 0;
  int scratch_timed_per_rep = 0;
  bool scratch_extrapolated = false;
  int cross_shard_edges = 0;
  int score_refits = 0;
  MeanStd f1_after;
  bool audit_passed = true;
};

struct UnlearnBenchResult {
  std::vector<UnlearnTimingRow> rows;
};

UnlearnBenchResult bench_unlearn(const BenchConfig& cfg);

// --- eval-utility / compare-agg --------------------------------------------

/// Every F1 of one repetition; the sharded models are shared by all modes.
struct RepetitionResult {
  int rep = 0;
  std::uint64_t seed = 0;
  std::optional<double> scratch_f1;
  std::map<PartitionMethod, std::map<AggregationMode, double>> f1;
  std::map<PartitionMethod, std::uint64_t> model_hash;  // combined shard parameter hash
};

RepetitionResult run_repetition(const BenchConfig& cfg, int rep, bool with_scratch);

struct UtilityCell {
  std::string variant;  // "scratch" or a partition method
  std::optional<AggregationMode> mode;
  std::vector<double> f1_per_rep;
  MeanStd f1;
};

struct UtilityResult {
  std::vector<RepetitionResult> repetitions;
  std::vector<UtilityCell> cells;
};

UtilityResult eval_utility(const BenchConfig& cfg);
/// Same as eval_utility over every aggregation mode and without scratch.
UtilityResult compare_aggregators(const BenchConfig& cfg);
UtilityResult summarize(std::vector<RepetitionResult> reps, const BenchConfig& cfg);

// --- sweeps -----------------------------------------------------------------

struct ShardSweepRow {
  int k = 0;
  MeanStd unlearn_seconds;
  MeanStd f1;
  bool balanced = true;
};

std::vector<ShardSweepRow> sweep_shards(const BenchConfig& cfg);

struct RequestSweepRow {
  int removed = 0;  // cumulative node requests applied
  MeanStd f1;
  bool audit_passed = true;
};

std::vector<RequestSweepRow> sweep_requests(const BenchConfig& cfg);

// --- guideline / score correlation -------------------------------------------

/// random when the GNN gains less than `threshold` F1 over an MLP, else
/// blpa for GCN and bekm for every other aggregator.
PartitionMethod recommend_partition(double gnn_f1, double mlp_f1, double threshold, Aggregator aggregator);

struct GuidelineRow {
  int rep = 0;
  double mlp_f1 = 0.0;
  double gnn_f1 = 0.0;
  double gap = 0.0;
  PartitionMethod recommendation = PartitionMethod::kRandom;
};

struct GuidelineResult {
  std::vector<GuidelineRow> rows;
  MeanStd gap;
  PartitionMethod recommendation = PartitionMethod::kRandom;  // from the mean gap
};

GuidelineResult guideline(const BenchConfig& cfg);

struct ScoreCorrelationRow {
  int shard = 0;
  NodeId size = 0;
  double f1 = 0.0;
  double alpha = 0.0;
};

struct ScoreCorrelation {
  std::vector<ScoreCorrelationRow> rows;
  double spearman = 0.0;
};

/// Standalone test F1 and importance score of every shard of `eraser`.
ScoreCorrelation score_correlation(const Eraser& eraser, std::span<const NodeId> test_nodes,
                                   F1Average average = F1Average::kMicro);

}  // namespace gerk
