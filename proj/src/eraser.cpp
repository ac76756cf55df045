#include "gerk/eraser.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "eraser_state.hpp"
#include "gerk/error.hpp"
#include "parallel.hpp"

namespace gerk {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

NodeList rows_of(const GraphView& view, const NodeList& members) {
  NodeList rows;
  rows.reserve(members.size());
  for (NodeId u : members) rows.push_back(view.row[static_cast<std::size_t>(u)]);
  return rows;
}

Graph shard_graph(const GraphView& view, const NodeList& members) {
  const NodeList rows = rows_of(view, members);
  return induced_subgraph(view.graph, rows).graph;
}

}  // namespace

std::string to_string(InferencePolicy p) {
  return p == InferencePolicy::kShardLocal ? "shard-local" : "global-ego";
}

InferencePolicy parse_inference_policy(const std::string& s) {
  if (s == "shard-local") return InferencePolicy::kShardLocal;
  if (s == "global-ego") return InferencePolicy::kGlobalEgo;
  throw ConfigError("unknown inference policy '" + s + "'");
}

void EraserConfig::validate() const {
  partition.validate();
  gnn.validate();
  opt_aggr.validate();
  if (threads < 0) throw ConfigError("threads must be >= 0");
}

bool AuditReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.passed; });
}

std::string AuditReport::summary() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << (c.passed ? "ok   " : "FAIL ") << c.name;
    if (!c.detail.empty()) out << ": " << c.detail;
    out << '\n';
  }
  return out.str();
}

std::uint64_t shard_seed(std::uint64_t base, int shard) {
  return splitmix64(base ^ splitmix64(static_cast<std::uint64_t>(shard) + 1));
}

Shard train_shard(NodeList members, Graph graph, const GnnConfig& cfg, std::uint64_t seed) {
  Shard s;
  s.members = std::move(members);
  s.graph = std::move(graph);
  s.seed = seed;
  s.stub = s.members.empty();
  if (!s.stub) {
    GnnConfig c = cfg;
    c.seed = seed;
    s.model = train(s.graph, c);
  }
  s.record = {content_hash(s.graph), s.stub ? 0 : parameter_hash(s.model), seed};
  return s;
}

PosteriorMatrix local_posteriors(const GnnModel& model, const Graph& g, std::span<const char> is_train,
                                 std::span<const char> allowed, std::span<const NodeId> queries) {
  const auto n = static_cast<std::size_t>(g.num_nodes());
  if (is_train.size() != n || allowed.size() != n) throw ConfigError("role masks do not match the graph");
  const int radius = model.config.layers + 1;
  PosteriorMatrix out(static_cast<Eigen::Index>(queries.size()), model.num_classes);
  std::vector<std::ptrdiff_t> seen(n, -1);
  std::vector<std::ptrdiff_t> extra(n, -1);
  NodeList nodes, frontier, next;
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const NodeId q = queries[qi];
    if (!g.contains(q)) throw LookupError("unknown query node " + std::to_string(q));
    const auto stamp = static_cast<std::ptrdiff_t>(qi);
    for (NodeId v : g.neighbors(q)) {
      if (!is_train[static_cast<std::size_t>(v)]) extra[static_cast<std::size_t>(v)] = stamp;
    }
    auto admitted = [&](NodeId v) {
      const auto i = static_cast<std::size_t>(v);
      return allowed[i] || extra[i] == stamp;
    };
    nodes.assign(1, q);
    frontier.assign(1, q);
    seen[static_cast<std::size_t>(q)] = stamp;
    for (int depth = 0; depth < radius && !frontier.empty(); ++depth) {
      next.clear();
      for (NodeId x : frontier) {
        for (NodeId v : g.neighbors(x)) {
          if (seen[static_cast<std::size_t>(v)] == stamp || !admitted(v)) continue;
          seen[static_cast<std::size_t>(v)] = stamp;
          nodes.push_back(v);
          next.push_back(v);
        }
      }
      frontier.swap(next);
    }
    std::sort(nodes.begin(), nodes.end());
    const Subgraph ball = induced_subgraph(g, nodes);
    const NodeId local = ball.from_parent[static_cast<std::size_t>(q)];
    out.row(static_cast<Eigen::Index>(qi)) = forward(model, ball.graph, std::span(&local, 1));
  }
  return out;
}

PosteriorMatrix ego_posteriors(const GnnModel& model, const Graph& g, std::span<const NodeId> queries) {
  // A radius layers+1 ball reproduces the full-graph forward pass exactly.
  return forward(model, g, queries);
}

namespace detail {

NodeList query_rows(const GraphView& view, std::span<const NodeId> queries) {
  NodeList rows;
  rows.reserve(queries.size());
  for (NodeId u : queries) {
    if (u < 0 || static_cast<std::size_t>(u) >= view.row.size() || view.row[static_cast<std::size_t>(u)] < 0) {
      throw LookupError("node " + std::to_string(u) + " is not in the current graph");
    }
    rows.push_back(view.row[static_cast<std::size_t>(u)]);
  }
  return rows;
}

PosteriorMatrix shard_rows(const GraphView& view, const Shard& shard, int i, std::span<const NodeId> rows,
                           InferencePolicy policy) {
  const int classes = view.graph.num_classes;
  if (shard.stub) {
    return PosteriorMatrix::Constant(static_cast<Eigen::Index>(rows.size()), classes, 1.0 / classes);
  }
  if (policy == InferencePolicy::kGlobalEgo) return ego_posteriors(shard.model, view.graph, rows);
  std::vector<char> allowed(view.shard.size());
  for (std::size_t r = 0; r < allowed.size(); ++r) allowed[r] = view.shard[r] == i;
  return local_posteriors(shard.model, view.graph, view.train, allowed, rows);
}

GraphView make_view(const Graph& g, NodeList original, std::size_t original_count, const std::vector<char>& train,
                    const std::vector<ShardId>& shard) {
  GraphView view;
  view.graph = g;
  view.original = std::move(original);
  view.row.assign(original_count, -1);
  for (std::size_t r = 0; r < view.original.size(); ++r) {
    view.row[static_cast<std::size_t>(view.original[r])] = static_cast<NodeId>(r);
  }
  view.train = train;
  view.shard = shard;
  return view;
}

}  // namespace detail

namespace {

void refresh_cache(ScoreCache& cache, const Eraser::State::Snapshot& snap, const EraserConfig& cfg) {
  const NodeList rows = detail::query_rows(*snap.view, cache.nodes);
  const int k = static_cast<int>(snap.shards.size());
  cache.posteriors.resize(static_cast<std::size_t>(k));
  cache.dirty.resize(static_cast<std::size_t>(k), 1);
  detail::parallel_for(k, cfg.threads, [&](int i) {
    if (!cache.dirty[static_cast<std::size_t>(i)]) return;
    cache.posteriors[static_cast<std::size_t>(i)] =
        detail::shard_rows(*snap.view, *snap.shards[static_cast<std::size_t>(i)], i, rows, cfg.inference);
  });
  std::fill(cache.dirty.begin(), cache.dirty.end(), 0);
}

ImportanceScores fit_from_cache(const ScoreCache& cache, const GraphView& view, const OptAggrConfig& cfg) {
  LabelList labels;
  for (NodeId u : cache.nodes) {
    labels.push_back(view.graph.labels[static_cast<std::size_t>(view.row[static_cast<std::size_t>(u)])]);
  }
  ImportanceScores s = fit_importance_scores(cache.posteriors, labels, cfg);
  s.score_train_nodes = cache.nodes;
  return s;
}

void drop_cache_row(ScoreCache& cache, NodeId u) {
  const auto it = std::lower_bound(cache.nodes.begin(), cache.nodes.end(), u);
  if (it == cache.nodes.end() || *it != u) return;
  const auto r = static_cast<Eigen::Index>(it - cache.nodes.begin());
  cache.nodes.erase(it);
  for (auto& p : cache.posteriors) {
    if (p.rows() <= r) continue;
    PosteriorMatrix kept(p.rows() - 1, p.cols());
    kept.topRows(r) = p.topRows(r);
    kept.bottomRows(p.rows() - 1 - r) = p.bottomRows(p.rows() - 1 - r);
    p = std::move(kept);
  }
}

}  // namespace

Eraser::Eraser(std::unique_ptr<State> state) : s_(std::move(state)) {}
Eraser::Eraser(Eraser&&) noexcept = default;
Eraser& Eraser::operator=(Eraser&&) noexcept = default;
Eraser::~Eraser() = default;

Eraser Eraser::build(const Graph& g, const NodeSplit& split, const EraserConfig& cfg, const ShardAssignment* preset) {
  cfg.validate();
  validate(g);
  const auto t0 = Clock::now();
  auto state = std::make_unique<State>();
  state->cfg = cfg;

  NodeList train_nodes = split.train_nodes;
  std::sort(train_nodes.begin(), train_nodes.end());
  if (train_nodes.empty()) throw ConfigError("the split has no training nodes");
  NodeList kept = train_nodes;
  kept.insert(kept.end(), split.test_nodes.begin(), split.test_nodes.end());
  std::sort(kept.begin(), kept.end());
  if (std::adjacent_find(kept.begin(), kept.end()) != kept.end()) {
    throw ConfigError("train and test nodes overlap");
  }

  const Subgraph g_train = induced_subgraph(g, train_nodes);
  ShardAssignment assignment;
  if (preset) {
    assignment = *preset;
  } else if (cfg.partition.method == PartitionMethod::kBekm) {
    const Matrix emb = node_embeddings(g_train.graph, cfg.gnn);
    assignment = partition(g_train.graph, &emb, cfg.partition);
  } else {
    assignment = partition(g_train.graph, nullptr, cfg.partition);
  }
  validate(assignment, g_train.graph.num_nodes());
  state->initial_assignment = assignment;
  state->initial_train_count = train_nodes.size();

  const Subgraph current = induced_subgraph(g, kept);
  std::vector<char> is_train(kept.size(), 0);
  std::vector<ShardId> shard(kept.size(), -1);
  for (std::size_t t = 0; t < train_nodes.size(); ++t) {
    const auto r = static_cast<std::size_t>(current.from_parent[static_cast<std::size_t>(train_nodes[t])]);
    is_train[r] = 1;
    shard[r] = assignment.assign[t];
  }
  auto view = std::make_shared<GraphView>(
      detail::make_view(current.graph, current.to_parent, static_cast<std::size_t>(g.num_nodes()), is_train, shard));

  const auto members = assignment.shards();
  std::vector<std::shared_ptr<const Shard>> shards(static_cast<std::size_t>(assignment.k));
  detail::parallel_for(assignment.k, cfg.threads, [&](int i) {
    NodeList ids;
    for (NodeId local : members[static_cast<std::size_t>(i)]) ids.push_back(train_nodes[static_cast<std::size_t>(local)]);
    Graph sg = shard_graph(*view, ids);
    shards[static_cast<std::size_t>(i)] =
        std::make_shared<const Shard>(train_shard(std::move(ids), std::move(sg), cfg.gnn, shard_seed(cfg.gnn.seed, i)));
  });
  state->view = view;
  state->shards = std::move(shards);

  if (cfg.fit_scores) {
    state->cache.nodes = sample_score_nodes(train_nodes, cfg.opt_aggr.subset_frac, cfg.opt_aggr.seed);
    refresh_cache(state->cache, state->snapshot(), cfg);
    state->scores = std::make_shared<const ImportanceScores>(fit_from_cache(state->cache, *view, cfg.opt_aggr));
  }
  state->build_seconds = seconds_since(t0);
  return Eraser(std::move(state));
}

UnlearnReport Eraser::unlearn(const UnlearnRequest& req) {
  std::lock_guard writer(s_->writer);
  const State::Snapshot snap = s_->snapshot();
  const GraphView& view = *snap.view;
  const EraserConfig& cfg = s_->cfg;
  const int k = static_cast<int>(snap.shards.size());

  auto row_of = [&](NodeId u) {
    if (u < 0 || static_cast<std::size_t>(u) >= view.row.size() || view.row[static_cast<std::size_t>(u)] < 0) {
      throw LookupError("node " + std::to_string(u) + " is not in the current graph");
    }
    const NodeId r = view.row[static_cast<std::size_t>(u)];
    if (!view.train[static_cast<std::size_t>(r)]) {
      throw ConfigError("node " + std::to_string(u) + " is a test node; only training data can be unlearned");
    }
    return r;
  };

  UnlearnReport report;
  report.request = req;
  auto next_view = std::make_shared<GraphView>();
  std::optional<ShardId> affected;
  std::vector<ShardId> dirty_shards;
  bool touches_scores = false;

  if (req.kind == RequestKind::kNode) {
    const NodeId r = row_of(req.u);
    const Subgraph reduced = delete_node(view.graph, r);
    NodeList original;
    std::vector<char> train;
    std::vector<ShardId> shard;
    for (NodeId nr : reduced.to_parent) {
      original.push_back(view.original[static_cast<std::size_t>(nr)]);
      train.push_back(view.train[static_cast<std::size_t>(nr)]);
      shard.push_back(view.shard[static_cast<std::size_t>(nr)]);
    }
    *next_view = detail::make_view(reduced.graph, std::move(original), view.row.size(), train, shard);
    affected = view.shard[static_cast<std::size_t>(r)];
    dirty_shards.push_back(*affected);
    touches_scores = snap.scores && snap.scores->contains(req.u);
  } else {
    const NodeId ru = row_of(req.u);
    const NodeId rv = row_of(req.v);
    if (!view.graph.has_edge(ru, rv)) {
      throw LookupError("edge (" + std::to_string(req.u) + ", " + std::to_string(req.v) + ") is not in the graph");
    }
    *next_view = view;
    next_view->graph = delete_edge(view.graph, ru, rv);
    const ShardId su = view.shard[static_cast<std::size_t>(ru)];
    const ShardId sv = view.shard[static_cast<std::size_t>(rv)];
    if (su == sv) affected = su;
    dirty_shards = {su, sv};
    touches_scores = snap.scores && (snap.scores->contains(req.u) || snap.scores->contains(req.v));
  }
  if (cfg.inference == InferencePolicy::kGlobalEgo) {
    dirty_shards.clear();
    for (int i = 0; i < k; ++i) dirty_shards.push_back(i);
  }

  const auto t_total = Clock::now();
  std::shared_ptr<const Shard> retrained;
  if (affected) {
    const Shard& old = *snap.shards[static_cast<std::size_t>(*affected)];
    NodeList members = old.members;
    if (req.kind == RequestKind::kNode) members.erase(std::find(members.begin(), members.end(), req.u));
    Graph sg = shard_graph(*next_view, members);
    const auto t0 = Clock::now();
    retrained = std::make_shared<const Shard>(train_shard(std::move(members), std::move(sg), cfg.gnn, old.seed));
    report.retrain_seconds = seconds_since(t0);
  }

  std::shared_ptr<const ImportanceScores> next_scores = snap.scores;
  if (snap.scores) {
    if (req.kind == RequestKind::kNode) drop_cache_row(s_->cache, req.u);
    s_->cache.dirty.resize(static_cast<std::size_t>(k), 1);
    for (ShardId i : dirty_shards) s_->cache.dirty[static_cast<std::size_t>(i)] = 1;
    const bool emptied = retrained && retrained->stub;
    if (touches_scores || emptied) {
      State::Snapshot next = snap;
      next.view = next_view;
      if (retrained) next.shards[static_cast<std::size_t>(*affected)] = retrained;
      const auto t0 = Clock::now();
      refresh_cache(s_->cache, next, cfg);
      next_scores = std::make_shared<const ImportanceScores>(fit_from_cache(s_->cache, *next_view, cfg.opt_aggr));
      report.scores_retrain_seconds = seconds_since(t0);
      report.scores_retrained = true;
    } else {
      auto kept = std::make_shared<ImportanceScores>(*snap.scores);
      kept->score_train_nodes = s_->cache.nodes;
      next_scores = kept;
    }
  }
  report.total_seconds = seconds_since(t_total);
  report.affected_shard = affected;

  std::unique_lock lock(s_->mu);
  s_->view = next_view;
  if (retrained) s_->shards[static_cast<std::size_t>(*affected)] = retrained;
  s_->scores = next_scores;
  s_->log.push_back(req);
  return report;
}

ShardPosteriors Eraser::shard_posteriors(std::span<const NodeId> queries) const {
  const State::Snapshot snap = s_->snapshot();
  const NodeList rows = detail::query_rows(*snap.view, queries);
  ShardPosteriors sp(snap.shards.size());
  detail::parallel_for(static_cast<int>(snap.shards.size()), s_->cfg.threads, [&](int i) {
    sp[static_cast<std::size_t>(i)] =
        detail::shard_rows(*snap.view, *snap.shards[static_cast<std::size_t>(i)], i, rows, s_->cfg.inference);
  });
  return sp;
}

LabelList Eraser::predict(std::span<const NodeId> queries, AggregationMode mode) const {
  switch (mode) {
    case AggregationMode::kMean: return argmax_rows(mean_aggr(shard_posteriors(queries)));
    case AggregationMode::kMajority: return maj_aggr(shard_posteriors(queries));
    case AggregationMode::kOptimal: {
      const auto scores = this->scores();
      if (!scores) throw ConfigError("optimal aggregation needs fitted importance scores");
      return weighted_predict(shard_posteriors(queries), scores->alpha);
    }
  }
  throw ConfigError("unknown aggregation mode");
}

LabelList Eraser::predict_weighted(std::span<const NodeId> queries, const Vector& alpha) const {
  return weighted_predict(shard_posteriors(queries), alpha);
}

AuditReport Eraser::audit() const {
  const State::Snapshot snap = s_->snapshot();
  const GraphView& view = *snap.view;
  const int k = static_cast<int>(snap.shards.size());
  const NodeId delta = s_->initial_assignment.delta;
  AuditReport report;
  auto check = [&](std::string name, bool ok, std::string detail = {}) {
    report.checks.push_back({std::move(name), ok, ok ? std::string() : std::move(detail)});
  };

  {
    std::string bad;
    for (std::size_t r = 0; r < view.train.size() && bad.empty(); ++r) {
      const ShardId s = view.shard[r];
      if (view.train[r] ? (s < 0 || s >= k) : s != -1) bad = "node " + std::to_string(view.original[r]);
    }
    check("assignment_total", bad.empty(), bad + " has an invalid shard");
  }
  {
    std::string bad;
    std::size_t covered = 0;
    for (int i = 0; i < k && bad.empty(); ++i) {
      const Shard& sh = *snap.shards[static_cast<std::size_t>(i)];
      if (static_cast<NodeId>(sh.members.size()) > delta) bad = "shard " + std::to_string(i) + " exceeds delta";
      if (!std::is_sorted(sh.members.begin(), sh.members.end())) bad = "shard " + std::to_string(i) + " unsorted";
      for (NodeId u : sh.members) {
        const bool ok = u >= 0 && static_cast<std::size_t>(u) < view.row.size() && view.row[static_cast<std::size_t>(u)] >= 0 &&
                        view.shard[static_cast<std::size_t>(view.row[static_cast<std::size_t>(u)])] == i;
        if (!ok) bad = "shard " + std::to_string(i) + " lists node " + std::to_string(u);
      }
      covered += sh.members.size();
    }
    const auto train_count = static_cast<std::size_t>(std::count(view.train.begin(), view.train.end(), 1));
    if (bad.empty() && covered != train_count) bad = "shards cover " + std::to_string(covered) + " of " + std::to_string(train_count);
    check("shards_disjoint_cover_within_delta", bad.empty(), bad);
  }
  {
    std::string bad;
    for (int i = 0; i < k && bad.empty(); ++i) {
      const Shard& sh = *snap.shards[static_cast<std::size_t>(i)];
      bool member_ok = true;
      for (NodeId u : sh.members) {
        if (u < 0 || static_cast<std::size_t>(u) >= view.row.size() || view.row[static_cast<std::size_t>(u)] < 0) member_ok = false;
      }
      if (!member_ok || !(sh.graph == shard_graph(view, sh.members))) bad = "shard " + std::to_string(i);
    }
    check("shard_graphs_induced", bad.empty(), bad + " graph differs from the induced training subgraph");
  }
  {
    std::string bad;
    for (int i = 0; i < k && bad.empty(); ++i) {
      const Shard& sh = *snap.shards[static_cast<std::size_t>(i)];
      const bool fresh = sh.record.graph_hash == content_hash(sh.graph) && sh.record.seed == sh.seed &&
                         sh.stub == sh.members.empty() && (sh.stub || sh.record.param_hash == parameter_hash(sh.model));
      if (!fresh) bad = "shard " + std::to_string(i);
    }
    check("models_fresh", bad.empty(), bad + " model was not trained on its current graph");
  }
  {
    std::string bad;
    std::size_t node_deletions = 0;
    for (const auto& req : s_->log) {
      if (req.kind == RequestKind::kNode) {
        ++node_deletions;
        if (view.row[static_cast<std::size_t>(req.u)] >= 0) bad = "node " + std::to_string(req.u) + " still present";
        for (const auto& sh : snap.shards) {
          if (std::binary_search(sh->members.begin(), sh->members.end(), req.u)) bad = "node " + std::to_string(req.u) + " in a shard";
        }
        if (snap.scores && snap.scores->contains(req.u)) bad = "node " + std::to_string(req.u) + " in score nodes";
      } else {
        const NodeId ru = view.row[static_cast<std::size_t>(req.u)];
        const NodeId rv = view.row[static_cast<std::size_t>(req.v)];
        if (ru < 0 || rv < 0) continue;
        if (view.graph.has_edge(ru, rv)) bad = "edge still present";
        for (const auto& sh : snap.shards) {
          const auto a = std::lower_bound(sh->members.begin(), sh->members.end(), req.u);
          const auto b = std::lower_bound(sh->members.begin(), sh->members.end(), req.v);
          if (a != sh->members.end() && *a == req.u && b != sh->members.end() && *b == req.v &&
              sh->graph.has_edge(static_cast<NodeId>(a - sh->members.begin()), static_cast<NodeId>(b - sh->members.begin()))) {
            bad = "edge still in a shard graph";
          }
        }
      }
    }
    check("deletions_absent", bad.empty(), bad);
    const auto train_count = static_cast<std::size_t>(std::count(view.train.begin(), view.train.end(), 1));
    check("deletion_log_consistent", train_count + node_deletions == s_->initial_train_count,
          std::to_string(train_count) + " training nodes after " + std::to_string(node_deletions) + " node deletions");
  }
  if (snap.scores) {
    std::string bad;
    try {
      validate(*snap.scores, k);
    } catch (const Error& e) {
      bad = e.what();
    }
    for (NodeId u : snap.scores->score_train_nodes) {
      if (view.row[static_cast<std::size_t>(u)] < 0 || !view.train[static_cast<std::size_t>(view.row[static_cast<std::size_t>(u)])]) {
        bad = "score node " + std::to_string(u) + " is not a training node";
      }
    }
    check("scores_valid", bad.empty(), bad);
  }
  return report;
}

const EraserConfig& Eraser::config() const { return s_->cfg; }
int Eraser::num_shards() const { return static_cast<int>(s_->snapshot().shards.size()); }
std::shared_ptr<const Shard> Eraser::shard(int i) const { return s_->snapshot().shards.at(static_cast<std::size_t>(i)); }

std::optional<ImportanceScores> Eraser::scores() const {
  const auto snap = s_->snapshot();
  if (!snap.scores) return std::nullopt;
  return *snap.scores;
}

Subgraph Eraser::current_graph() const {
  const auto snap = s_->snapshot();
  Subgraph out;
  out.graph = snap.view->graph;
  out.to_parent = snap.view->original;
  out.from_parent = snap.view->row;
  return out;
}

Subgraph Eraser::training_graph() const {
  const auto snap = s_->snapshot();
  NodeList rows;
  for (std::size_t r = 0; r < snap.view->train.size(); ++r) {
    if (snap.view->train[r]) rows.push_back(static_cast<NodeId>(r));
  }
  Subgraph sub = induced_subgraph(snap.view->graph, rows);
  for (auto& p : sub.to_parent) p = snap.view->original[static_cast<std::size_t>(p)];
  sub.from_parent.assign(snap.view->row.size(), -1);
  for (std::size_t i = 0; i < sub.to_parent.size(); ++i) {
    sub.from_parent[static_cast<std::size_t>(sub.to_parent[i])] = static_cast<NodeId>(i);
  }
  return sub;
}

NodeList Eraser::training_nodes() const {
  const auto snap = s_->snapshot();
  NodeList out;
  for (std::size_t r = 0; r < snap.view->train.size(); ++r) {
    if (snap.view->train[r]) out.push_back(snap.view->original[r]);
  }
  return out;
}

NodeList Eraser::test_nodes() const {
  const auto snap = s_->snapshot();
  NodeList out;
  for (std::size_t r = 0; r < snap.view->train.size(); ++r) {
    if (!snap.view->train[r]) out.push_back(snap.view->original[r]);
  }
  return out;
}

ShardId Eraser::shard_of(NodeId u) const {
  const auto snap = s_->snapshot();
  if (u < 0 || static_cast<std::size_t>(u) >= snap.view->row.size()) return -1;
  const NodeId r = snap.view->row[static_cast<std::size_t>(u)];
  return r < 0 ? -1 : snap.view->shard[static_cast<std::size_t>(r)];
}

std::vector<UnlearnRequest> Eraser::deletion_log() const {
  std::shared_lock lock(s_->mu);
  return s_->log;
}

const ShardAssignment& Eraser::initial_assignment() const { return s_->initial_assignment; }
double Eraser::build_seconds() const { return s_->build_seconds; }

void Eraser::inject_stale_model_for_testing(int i) {
  std::lock_guard writer(s_->writer);
  const auto snap = s_->snapshot();
  const Shard& old = *snap.shards.at(static_cast<std::size_t>(i));
  if (old.members.size() < 2) throw ConfigError("stale injection needs a shard with two or more nodes");
  NodeList fewer(old.members.begin() + 1, old.members.end());
  Shard stale = train_shard(fewer, shard_graph(*snap.view, fewer), s_->cfg.gnn, old.seed);
  stale.members = old.members;
  stale.graph = old.graph;
  std::unique_lock lock(s_->mu);
  s_->shards[static_cast<std::size_t>(i)] = std::make_shared<const Shard>(std::move(stale));
}

}  // namespace gerk
