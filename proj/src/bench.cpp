#include "gerk/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "gerk/error.hpp"
#include "parallel.hpp"

namespace gerk {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<char> train_mask(const Graph& g, const NodeSplit& split) {
  std::vector<char> mask(static_cast<std::size_t>(g.num_nodes()), 0);
  for (NodeId u : split.train_nodes) mask[static_cast<std::size_t>(u)] = 1;
  return mask;
}

double mean_of(const std::vector<double>& v) { return mean_std(v).mean; }

bool has_mode(const BenchConfig& cfg, AggregationMode m) {
  return std::find(cfg.modes.begin(), cfg.modes.end(), m) != cfg.modes.end();
}

double f1_of(const LabelList& pred, const Graph& g, std::span<const NodeId> nodes, F1Average avg) {
  return f1_score(pred, labels_of(g, nodes), avg);
}

}  // namespace

Graph DatasetSource::load(int repetition) const {
  const int sources = (sbm ? 1 : 0) + (!node_file.empty() ? 1 : 0) + (!snapshot.empty() ? 1 : 0);
  if (sources != 1) throw ConfigError("exactly one dataset source (sbm, node/edge files or snapshot) is required");
  if (sbm) {
    SbmSpec spec = *sbm;
    spec.seed += static_cast<std::uint64_t>(repetition);
    return generate_sbm(spec);
  }
  if (!snapshot.empty()) return load_graph_snapshot(snapshot);
  if (edge_file.empty()) throw ConfigError("a node file needs an edge file");
  return load_graph(node_file, edge_file).graph;
}

std::string DatasetSource::describe() const {
  if (sbm) {
    std::size_t n = 0;
    for (NodeId b : sbm->blocks) n += static_cast<std::size_t>(b);
    return "sbm(" + std::to_string(sbm->blocks.size()) + " blocks, " + std::to_string(n) + " nodes)";
  }
  if (!snapshot.empty()) return snapshot.string();
  return node_file.string() + " + " + edge_file.string();
}

void BenchConfig::validate() const {
  eraser.validate();
  mlp.validate();
  if (methods.empty()) throw ConfigError("at least one partition method is required");
  if (modes.empty()) throw ConfigError("at least one aggregation mode is required");
  if (n_requests < 1) throw ConfigError("n_requests must be >= 1");
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw ConfigError("train_ratio must lie in (0, 1)");
  if (scratch_requests < 0) throw ConfigError("scratch_requests must be >= 0");
  if (workers < 0) throw ConfigError("workers must be >= 0");
  for (int k : k_list) {
    if (k < 1) throw ConfigError("every k in k_list must be >= 1");
  }
  for (int c : request_counts) {
    if (c < 0) throw ConfigError("request counts must be >= 0");
  }
}

EraserConfig BenchConfig::eraser_for(int rep, PartitionMethod method) const {
  EraserConfig e = eraser;
  const std::uint64_t s = repetition_seed(rep);
  e.partition.method = method;
  e.partition.seed = s;
  e.gnn.seed = s;
  e.opt_aggr.seed = s;
  e.fit_scores = has_mode(*this, AggregationMode::kOptimal);
  return e;
}

Workload make_workload(const BenchConfig& cfg, int rep) {
  Workload w;
  w.graph = cfg.dataset.load(rep);
  w.split = split_train_test(w.graph, cfg.train_ratio, cfg.repetition_seed(rep), cfg.stratified_split);
  return w;
}

LabelList labels_of(const Graph& g, std::span<const NodeId> nodes) {
  LabelList out;
  out.reserve(nodes.size());
  for (NodeId u : nodes) out.push_back(g.labels[static_cast<std::size_t>(u)]);
  return out;
}

ScratchModel train_scratch(const Graph& g_train, const GnnConfig& cfg) {
  ScratchModel out;
  const auto t0 = Clock::now();
  out.model = train(g_train, cfg);
  out.train_seconds = seconds_since(t0);
  return out;
}

LabelList scratch_predict(const GnnModel& model, const Graph& g, std::span<const char> is_train,
                          std::span<const NodeId> queries, InferencePolicy policy) {
  if (policy == InferencePolicy::kGlobalEgo) return argmax_rows(ego_posteriors(model, g, queries));
  return argmax_rows(local_posteriors(model, g, is_train, is_train, queries));
}

std::vector<UnlearnRequest> sample_requests(const Eraser& eraser, RequestKind kind, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<UnlearnRequest> out;
  if (kind == RequestKind::kNode) {
    NodeList nodes = eraser.training_nodes();
    std::shuffle(nodes.begin(), nodes.end(), rng);
    nodes.resize(std::min(nodes.size(), static_cast<std::size_t>(count)));
    for (NodeId u : nodes) out.push_back(UnlearnRequest::node(u));
    return out;
  }
  const Subgraph tg = eraser.training_graph();
  std::vector<Edge> edges;
  for (NodeId a = 0; a < tg.graph.num_nodes(); ++a) {
    for (NodeId b : tg.graph.neighbors(a)) {
      if (a < b) edges.emplace_back(tg.to_parent[static_cast<std::size_t>(a)], tg.to_parent[static_cast<std::size_t>(b)]);
    }
  }
  std::shuffle(edges.begin(), edges.end(), rng);
  edges.resize(std::min(edges.size(), static_cast<std::size_t>(count)));
  for (const auto& [u, v] : edges) out.push_back(UnlearnRequest::edge(u, v));
  return out;
}

UnlearnBenchResult bench_unlearn(const BenchConfig& cfg) {
  cfg.validate();
  UnlearnBenchResult result;
  for (PartitionMethod method : cfg.methods) {
    UnlearnTimingRow row;
    row.method = method;
    std::vector<double> unlearn_means, retrain_means, scratch_means, f1s;
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      const Workload w = make_workload(cfg, rep);
      const EraserConfig ecfg = cfg.eraser_for(rep, method);
      Eraser eraser = Eraser::build(w.graph, w.split, ecfg);
      const auto requests = sample_requests(eraser, cfg.request_kind, cfg.n_requests, cfg.repetition_seed(rep) ^ 0x5eedULL);

      std::vector<std::size_t> order(requests.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::mt19937_64 rng(cfg.repetition_seed(rep) ^ 0x5c7a7c4ULL);
      std::shuffle(order.begin(), order.end(), rng);
      order.resize(std::min(order.size(), static_cast<std::size_t>(cfg.scratch_requests)));
      std::vector<char> timed(requests.size(), 0);
      for (std::size_t i : order) timed[i] = 1;

      std::vector<double> unlearn, retrain, scratch;
      for (std::size_t j = 0; j < requests.size(); ++j) {
        const UnlearnReport rep_j = eraser.unlearn(requests[j]);
        unlearn.push_back(rep_j.total_seconds);
        retrain.push_back(rep_j.retrain_seconds);
        if (!rep_j.affected_shard) ++row.cross_shard_edges;
        if (rep_j.scores_retrained) ++row.score_refits;
        if (timed[j]) scratch.push_back(train_scratch(eraser.training_graph().graph, ecfg.gnn).train_seconds);
      }
      unlearn_means.push_back(mean_of(unlearn));
      retrain_means.push_back(mean_of(retrain));
      if (!scratch.empty()) scratch_means.push_back(mean_of(scratch));
      const NodeList test = eraser.test_nodes();
      f1s.push_back(f1_of(eraser.predict(test, cfg.modes.front()), w.graph, test, cfg.f1_average));
      row.audit_passed = row.audit_passed && eraser.audit().passed();
      row.requests_per_rep = static_cast<int>(requests.size());
      row.scratch_timed_per_rep = static_cast<int>(scratch.size());
    }
    row.unlearn_seconds = mean_std(unlearn_means);
    row.retrain_seconds = mean_std(retrain_means);
    row.scratch_seconds = mean_std(scratch_means);
    row.scratch_extrapolated = row.scratch_timed_per_rep < row.requests_per_rep;
    row.speedup = row.unlearn_seconds.mean > 0.0 ? row.scratch_seconds.mean / row.unlearn_seconds.mean : 0.0;
    row.f1_after = mean_std(f1s);
    result.rows.push_back(row);
  }
  return result;
}

RepetitionResult run_repetition(const BenchConfig& cfg, int rep, bool with_scratch) {
  const Workload w = make_workload(cfg, rep);
  const auto& test = w.split.test_nodes;
  RepetitionResult out;
  out.rep = rep;
  out.seed = cfg.repetition_seed(rep);

  if (with_scratch) {
    const Subgraph g_train = induced_subgraph(w.graph, w.split.train_nodes);
    GnnConfig gcfg = cfg.eraser.gnn;
    gcfg.seed = out.seed;
    const GnnModel model = train(g_train.graph, gcfg);
    const auto mask = train_mask(w.graph, w.split);
    out.scratch_f1 = f1_of(scratch_predict(model, w.graph, mask, test, cfg.eraser.inference), w.graph, test, cfg.f1_average);
  }

  for (PartitionMethod method : cfg.methods) {
    const Eraser eraser = Eraser::build(w.graph, w.split, cfg.eraser_for(rep, method));
    const ShardPosteriors sp = eraser.shard_posteriors(test);
    for (AggregationMode mode : cfg.modes) {
      LabelList pred;
      switch (mode) {
        case AggregationMode::kMean: pred = argmax_rows(mean_aggr(sp)); break;
        case AggregationMode::kMajority: pred = maj_aggr(sp); break;
        case AggregationMode::kOptimal: pred = weighted_predict(sp, eraser.scores()->alpha); break;
      }
      out.f1[method][mode] = f1_of(pred, w.graph, test, cfg.f1_average);
    }
    std::uint64_t h = 0;
    for (int i = 0; i < eraser.num_shards(); ++i) h = h * 1099511628211ULL ^ eraser.shard(i)->record.param_hash;
    out.model_hash[method] = h;
  }
  return out;
}

UtilityResult summarize(std::vector<RepetitionResult> reps, const BenchConfig& cfg) {
  UtilityResult out;
  out.repetitions = std::move(reps);
  UtilityCell scratch{"scratch", std::nullopt, {}, {}};
  for (const auto& r : out.repetitions) {
    if (r.scratch_f1) scratch.f1_per_rep.push_back(*r.scratch_f1);
  }
  if (!scratch.f1_per_rep.empty()) {
    scratch.f1 = mean_std(scratch.f1_per_rep);
    out.cells.push_back(scratch);
  }
  for (PartitionMethod method : cfg.methods) {
    for (AggregationMode mode : cfg.modes) {
      UtilityCell cell{to_string(method), mode, {}, {}};
      for (const auto& r : out.repetitions) cell.f1_per_rep.push_back(r.f1.at(method).at(mode));
      cell.f1 = mean_std(cell.f1_per_rep);
      out.cells.push_back(std::move(cell));
    }
  }
  return out;
}

namespace {

std::vector<RepetitionResult> run_all(const BenchConfig& cfg, bool with_scratch) {
  std::vector<RepetitionResult> reps(static_cast<std::size_t>(cfg.repetitions));
  detail::parallel_for(cfg.repetitions, cfg.workers == 0 ? 0 : cfg.workers,
                       [&](int rep) { reps[static_cast<std::size_t>(rep)] = run_repetition(cfg, rep, with_scratch); });
  return reps;
}

}  // namespace

UtilityResult eval_utility(const BenchConfig& cfg) {
  cfg.validate();
  return summarize(run_all(cfg, true), cfg);
}

UtilityResult compare_aggregators(const BenchConfig& cfg) {
  BenchConfig c = cfg;
  c.modes = {AggregationMode::kMean, AggregationMode::kMajority, AggregationMode::kOptimal};
  c.validate();
  return summarize(run_all(c, false), c);
}

std::vector<ShardSweepRow> sweep_shards(const BenchConfig& cfg) {
  cfg.validate();
  std::vector<ShardSweepRow> rows;
  for (int k : cfg.k_list) {
    ShardSweepRow row;
    row.k = k;
    std::vector<double> times, f1s;
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      const Workload w = make_workload(cfg, rep);
      EraserConfig ecfg = cfg.eraser_for(rep, cfg.methods.front());
      ecfg.partition.k = k;
      Eraser eraser = Eraser::build(w.graph, w.split, ecfg);
      try {
        validate(eraser.initial_assignment(), static_cast<NodeId>(w.split.train_nodes.size()));
      } catch (const InvariantError&) {
        row.balanced = false;
      }
      const NodeList test = eraser.test_nodes();
      f1s.push_back(f1_of(eraser.predict(test, cfg.modes.front()), w.graph, test, cfg.f1_average));
      std::vector<double> t;
      for (const auto& req : sample_requests(eraser, cfg.request_kind, cfg.n_requests, cfg.repetition_seed(rep) ^ 0x5eedULL)) {
        t.push_back(eraser.unlearn(req).total_seconds);
      }
      times.push_back(mean_of(t));
      row.balanced = row.balanced && eraser.audit().passed();
    }
    row.unlearn_seconds = mean_std(times);
    row.f1 = mean_std(f1s);
    rows.push_back(row);
  }
  return rows;
}

std::vector<RequestSweepRow> sweep_requests(const BenchConfig& cfg) {
  cfg.validate();
  std::vector<int> counts = cfg.request_counts;
  std::sort(counts.begin(), counts.end());
  counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
  std::vector<RequestSweepRow> rows(counts.size());
  std::vector<std::vector<double>> f1s(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) rows[c].removed = counts[c];

  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    const Workload w = make_workload(cfg, rep);
    Eraser eraser = Eraser::build(w.graph, w.split, cfg.eraser_for(rep, cfg.methods.front()));
    const auto requests = sample_requests(eraser, RequestKind::kNode, counts.empty() ? 0 : counts.back(),
                                          cfg.repetition_seed(rep) ^ 0x5eedULL);
    const NodeList test = eraser.test_nodes();
    std::size_t applied = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      while (applied < static_cast<std::size_t>(counts[c]) && applied < requests.size()) eraser.unlearn(requests[applied++]);
      f1s[c].push_back(f1_of(eraser.predict(test, cfg.modes.front()), w.graph, test, cfg.f1_average));
      rows[c].audit_passed = rows[c].audit_passed && eraser.audit().passed();
    }
  }
  for (std::size_t c = 0; c < counts.size(); ++c) rows[c].f1 = mean_std(f1s[c]);
  return rows;
}

PartitionMethod recommend_partition(double gnn_f1, double mlp_f1, double threshold, Aggregator aggregator) {
  if (gnn_f1 - mlp_f1 < threshold) return PartitionMethod::kRandom;
  return aggregator == Aggregator::kGcn ? PartitionMethod::kBlpa : PartitionMethod::kBekm;
}

GuidelineResult guideline(const BenchConfig& cfg) {
  cfg.validate();
  GuidelineResult out;
  std::vector<double> gaps;
  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    const Workload w = make_workload(cfg, rep);
    const std::uint64_t seed = cfg.repetition_seed(rep);
    const auto& test = w.split.test_nodes;

    MlpConfig mcfg = cfg.mlp;
    mcfg.seed = seed;
    const MlpModel mlp = train_mlp(w.graph, w.split.train_nodes, mcfg);
    const LabelList mlp_pred = argmax_rows(mlp_posteriors(mlp, [&] {
      Matrix x(static_cast<Eigen::Index>(test.size()), w.graph.feature_dim());
      for (std::size_t i = 0; i < test.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = w.graph.features.row(test[i]);
      return x;
    }()));

    GnnConfig gcfg = cfg.eraser.gnn;
    gcfg.seed = seed;
    const Subgraph g_train = induced_subgraph(w.graph, w.split.train_nodes);
    const GnnModel gnn = train(g_train.graph, gcfg);
    const auto mask = train_mask(w.graph, w.split);

    GuidelineRow row;
    row.rep = rep;
    row.mlp_f1 = f1_of(mlp_pred, w.graph, test, cfg.f1_average);
    row.gnn_f1 = f1_of(scratch_predict(gnn, w.graph, mask, test, cfg.eraser.inference), w.graph, test, cfg.f1_average);
    row.gap = row.gnn_f1 - row.mlp_f1;
    row.recommendation = recommend_partition(row.gnn_f1, row.mlp_f1, cfg.guideline_threshold, gcfg.aggregator);
    gaps.push_back(row.gap);
    out.rows.push_back(row);
  }
  out.gap = mean_std(gaps);
  out.recommendation = recommend_partition(out.gap.mean, 0.0, cfg.guideline_threshold, cfg.eraser.gnn.aggregator);
  return out;
}

ScoreCorrelation score_correlation(const Eraser& eraser, std::span<const NodeId> test_nodes, F1Average average) {
  const auto scores = eraser.scores();
  if (!scores) throw ConfigError("score correlation needs fitted importance scores");
  const ShardPosteriors sp = eraser.shard_posteriors(test_nodes);
  const Subgraph current = eraser.current_graph();
  LabelList truth;
  for (NodeId u : test_nodes) {
    truth.push_back(current.graph.labels[static_cast<std::size_t>(current.from_parent[static_cast<std::size_t>(u)])]);
  }
  ScoreCorrelation out;
  std::vector<double> f1s, alphas;
  for (int i = 0; i < eraser.num_shards(); ++i) {
    ScoreCorrelationRow row;
    row.shard = i;
    row.size = static_cast<NodeId>(eraser.shard(i)->members.size());
    row.f1 = f1_score(argmax_rows(sp[static_cast<std::size_t>(i)]), truth, average);
    row.alpha = scores->alpha(i);
    f1s.push_back(row.f1);
    alphas.push_back(row.alpha);
    out.rows.push_back(row);
  }
  out.spearman = spearman(alphas, f1s);
  return out;
}

}  // namespace gerk
