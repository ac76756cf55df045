#include "gerk/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "gerk/error.hpp"
#include "json_util.hpp"

namespace gerk {

std::string to_string(PartitionMethod m) {
  switch (m) {
    case PartitionMethod::kRandom: return "random";
    case PartitionMethod::kBlpa: return "blpa";
    case PartitionMethod::kBekm: return "bekm";
  }
  return "?";
}

PartitionMethod parse_partition_method(const std::string& s) {
  if (s == "random") return PartitionMethod::kRandom;
  if (s == "blpa") return PartitionMethod::kBlpa;
  if (s == "bekm") return PartitionMethod::kBekm;
  throw ConfigError("unknown partition method '" + s + "'");
}

std::string to_string(BekmInit i) { return i == BekmInit::kSample ? "sample" : "plus-plus"; }

BekmInit parse_bekm_init(const std::string& s) {
  if (s == "sample") return BekmInit::kSample;
  if (s == "plus-plus" || s == "kmeans++") return BekmInit::kPlusPlus;
  throw ConfigError("unknown BEKM init '" + s + "' (sample, plus-plus)");
}

void PartitionConfig::validate() const {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (!(gamma >= 1.0)) throw ConfigError("gamma must be >= 1");
  if (max_iterations < 1) throw ConfigError("max iterations T must be >= 1");
  if (!(bekm_tol >= 0.0)) throw ConfigError("bekm_tol must be >= 0");
}

NodeId PartitionConfig::delta_for(NodeId n) const {
  return static_cast<NodeId>(std::ceil(gamma * static_cast<double>(n) / static_cast<double>(k) - 1e-9));
}

std::vector<NodeId> ShardAssignment::shard_sizes() const {
  std::vector<NodeId> sizes(static_cast<std::size_t>(k), 0);
  for (ShardId s : assign) ++sizes[static_cast<std::size_t>(s)];
  return sizes;
}

std::vector<NodeList> ShardAssignment::shards() const {
  std::vector<NodeList> out(static_cast<std::size_t>(k));
  for (NodeId u = 0; u < num_nodes(); ++u) out[static_cast<std::size_t>(assign[static_cast<std::size_t>(u)])].push_back(u);
  return out;
}

void validate(const ShardAssignment& a, NodeId expected_nodes) {
  if (a.num_nodes() != expected_nodes) {
    throw InvariantError("assignment covers " + std::to_string(a.num_nodes()) + " nodes, expected " +
                         std::to_string(expected_nodes));
  }
  for (ShardId s : a.assign) {
    if (s < 0 || s >= a.k) throw InvariantError("shard id " + std::to_string(s) + " outside [0, k)");
  }
  const auto sizes = a.shard_sizes();
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    if (sizes[s] > a.delta) {
      throw InvariantError("shard " + std::to_string(s) + " holds " + std::to_string(sizes[s]) +
                           " nodes, delta is " + std::to_string(a.delta));
    }
  }
}

std::size_t within_shard_edges(const Graph& g, const std::vector<ShardId>& assign) {
  std::size_t count = 0;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    for (NodeId v : g.neighbors(u)) {
      if (u < v && assign[static_cast<std::size_t>(u)] == assign[static_cast<std::size_t>(v)]) ++count;
    }
  }
  return count;
}

ShardAssignment random_partition(NodeId n, int k, std::uint64_t seed) {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (k > n) {
    throw ConfigError("cannot split " + std::to_string(n) + " nodes into " + std::to_string(k) + " shards");
  }
  NodeList order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  ShardAssignment a;
  a.k = k;
  a.delta = (n + k - 1) / k;
  a.method = PartitionMethod::kRandom;
  a.seed = seed;
  a.assign.assign(static_cast<std::size_t>(n), 0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    a.assign[static_cast<std::size_t>(order[i])] = static_cast<ShardId>(i % static_cast<std::size_t>(k));
  }
  a.iterations_run = 0;
  a.converged = true;
  return a;
}

namespace {

NodeId checked_delta(NodeId n, const PartitionConfig& cfg) {
  cfg.validate();
  if (cfg.k > n) {
    throw ConfigError("cannot split " + std::to_string(n) + " nodes into " + std::to_string(cfg.k) + " shards");
  }
  const NodeId delta = cfg.delta_for(n);
  if (static_cast<long long>(cfg.k) * delta < n) {
    throw ConfigError("infeasible partition: k * delta < n");
  }
  return delta;
}

// Neighbor counts of every node per shard, as (shard, count) lists.
std::vector<std::vector<std::pair<ShardId, int>>> neighbor_counts(const Graph& g,
                                                                  const std::vector<ShardId>& assign) {
  std::vector<std::vector<std::pair<ShardId, int>>> out(static_cast<std::size_t>(g.num_nodes()));
  std::map<ShardId, int> tally;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    tally.clear();
    for (NodeId v : g.neighbors(u)) ++tally[assign[static_cast<std::size_t>(v)]];
    out[static_cast<std::size_t>(u)].assign(tally.begin(), tally.end());
  }
  return out;
}

struct Preference {
  int xi;
  NodeId node;
  bool stay;
  ShardId shard;
};

bool blpa_iteration_rebuild(const std::vector<std::vector<std::pair<ShardId, int>>>& counts, int k,
                            NodeId delta, std::vector<ShardId>& assign) {
  const auto n = static_cast<NodeId>(assign.size());
  std::vector<Preference> prefs;
  prefs.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(k));
  std::vector<int> row(static_cast<std::size_t>(k));
  for (NodeId u = 0; u < n; ++u) {
    std::fill(row.begin(), row.end(), 0);
    for (const auto& [s, c] : counts[static_cast<std::size_t>(u)]) row[static_cast<std::size_t>(s)] = c;
    for (ShardId s = 0; s < k; ++s) {
      prefs.push_back({row[static_cast<std::size_t>(s)], u, s == assign[static_cast<std::size_t>(u)], s});
    }
  }
  std::sort(prefs.begin(), prefs.end(), [](const Preference& a, const Preference& b) {
    if (a.xi != b.xi) return a.xi > b.xi;
    if (a.node != b.node) return a.node < b.node;
    if (a.stay != b.stay) return a.stay;
    return a.shard < b.shard;
  });

  std::vector<ShardId> next(static_cast<std::size_t>(n), -1);
  std::vector<NodeId> sizes(static_cast<std::size_t>(k), 0);
  for (const auto& p : prefs) {
    auto& slot = next[static_cast<std::size_t>(p.node)];
    if (slot != -1 || sizes[static_cast<std::size_t>(p.shard)] >= delta) continue;
    slot = p.shard;
    ++sizes[static_cast<std::size_t>(p.shard)];
  }
  const bool changed = next != assign;
  assign = std::move(next);
  return changed;
}

bool blpa_iteration_move(const std::vector<std::vector<std::pair<ShardId, int>>>& counts, int k, NodeId delta,
                         bool strict, int iteration, std::vector<ShardId>& assign,
                         std::vector<BlpaMove>* moves) {
  const auto n = static_cast<NodeId>(assign.size());
  struct Profile {
    NodeId node;
    ShardId src;
    ShardId dst;
    int xi;
    int xi_src;
  };
  std::vector<Profile> profiles;
  for (NodeId u = 0; u < n; ++u) {
    const ShardId src = assign[static_cast<std::size_t>(u)];
    int xi_src = 0;
    for (const auto& [s, c] : counts[static_cast<std::size_t>(u)]) {
      if (s == src) xi_src = c;
    }
    for (const auto& [s, c] : counts[static_cast<std::size_t>(u)]) {
      if (s != src) profiles.push_back({u, src, s, c, xi_src});
    }
  }
  std::sort(profiles.begin(), profiles.end(), [](const Profile& a, const Profile& b) {
    if (a.xi != b.xi) return a.xi > b.xi;
    if (a.node != b.node) return a.node < b.node;
    return a.dst < b.dst;
  });

  std::vector<NodeId> sizes(static_cast<std::size_t>(k), 0);
  for (ShardId s : assign) ++sizes[static_cast<std::size_t>(s)];
  std::vector<bool> moved(static_cast<std::size_t>(n), false);
  bool changed = false;
  for (const auto& p : profiles) {
    if (moved[static_cast<std::size_t>(p.node)]) continue;
    if (strict && p.xi <= p.xi_src) continue;
    if (sizes[static_cast<std::size_t>(p.dst)] >= delta) continue;
    --sizes[static_cast<std::size_t>(p.src)];
    ++sizes[static_cast<std::size_t>(p.dst)];
    assign[static_cast<std::size_t>(p.node)] = p.dst;
    moved[static_cast<std::size_t>(p.node)] = true;
    changed = true;
    if (moves) moves->push_back({iteration, p.node, p.src, p.dst, p.xi, p.xi_src});
  }
  return changed;
}

}  // namespace

ShardAssignment blpa(const Graph& g, const PartitionConfig& cfg,
                     const std::optional<std::vector<ShardId>>& initial, std::vector<BlpaMove>* moves) {
  const NodeId n = g.num_nodes();
  const NodeId delta = checked_delta(n, cfg);

  ShardAssignment a;
  a.k = cfg.k;
  a.delta = delta;
  a.method = PartitionMethod::kBlpa;
  a.seed = cfg.seed;
  if (initial) {
    if (static_cast<NodeId>(initial->size()) != n) throw ConfigError("initial assignment has the wrong length");
    for (ShardId s : *initial) {
      if (s < 0 || s >= cfg.k) throw ConfigError("initial assignment uses a shard outside [0, k)");
    }
    a.assign = *initial;
  } else {
    a.assign = random_partition(n, cfg.k, cfg.seed).assign;
  }

  for (int t = 1; t <= cfg.max_iterations; ++t) {
    const auto counts = neighbor_counts(g, a.assign);
    const bool changed =
        cfg.blpa_scan == BlpaScan::kRebuild
            ? blpa_iteration_rebuild(counts, cfg.k, delta, a.assign)
            : blpa_iteration_move(counts, cfg.k, delta, cfg.blpa_strict_improve, t, a.assign, moves);
    a.iterations_run = t;
    if (!changed) {
      a.converged = true;
      break;
    }
  }
  return a;
}

namespace {

Matrix sample_centroids(const EmbeddingSet& emb, int k, std::mt19937_64& rng) {
  NodeList order(static_cast<std::size_t>(emb.rows()));
  std::iota(order.begin(), order.end(), 0);
  Matrix centroids(k, emb.cols());
  for (int c = 0; c < k; ++c) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(c), order.size() - 1);
    std::swap(order[static_cast<std::size_t>(c)], order[pick(rng)]);
    centroids.row(c) = emb.row(order[static_cast<std::size_t>(c)]);
  }
  return centroids;
}

// k-means++ seeding: first centroid uniform, the rest with probability
// proportional to squared distance from the nearest chosen centroid.
Matrix plus_plus_centroids(const EmbeddingSet& emb, int k, std::mt19937_64& rng) {
  const Eigen::Index n = emb.rows();
  Matrix centroids(k, emb.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  Eigen::Index pick = first(rng);
  chosen[static_cast<std::size_t>(pick)] = true;
  centroids.row(0) = emb.row(pick);
  Vector nearest = (emb.rowwise() - emb.row(pick)).rowwise().squaredNorm();

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!chosen[static_cast<std::size_t>(i)]) total += nearest(i);
    }
    pick = -1;
    if (total > 0.0) {
      double r = unit(rng) * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (chosen[static_cast<std::size_t>(i)] || nearest(i) <= 0.0) continue;
        pick = i;
        r -= nearest(i);
        if (r < 0.0) break;
      }
    }
    if (pick < 0) {
      // Every remaining point coincides with a centroid; fall back to uniform.
      NodeList pool;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) pool.push_back(static_cast<NodeId>(i));
      }
      std::uniform_int_distribution<std::size_t> any(0, pool.size() - 1);
      pick = pool[any(rng)];
    }
    chosen[static_cast<std::size_t>(pick)] = true;
    centroids.row(c) = emb.row(pick);
    nearest = nearest.cwiseMin((emb.rowwise() - emb.row(pick)).rowwise().squaredNorm());
  }
  return centroids;
}

}  // namespace

ShardAssignment bekm(const EmbeddingSet& embeddings, const PartitionConfig& cfg) {
  const auto n = static_cast<NodeId>(embeddings.rows());
  const NodeId delta = checked_delta(n, cfg);
  if (!embeddings.allFinite()) throw ConfigError("embeddings contain non-finite entries");
  const int k = cfg.k;

  ShardAssignment a;
  a.k = k;
  a.delta = delta;
  a.method = PartitionMethod::kBekm;
  a.seed = cfg.seed;

  std::mt19937_64 rng(cfg.seed);
  Matrix centroids = cfg.bekm_init == BekmInit::kSample ? sample_centroids(embeddings, k, rng)
                                                       : plus_plus_centroids(embeddings, k, rng);

  struct Pair {
    double dist;
    NodeId node;
    ShardId shard;
  };
  std::vector<Pair> pairs(static_cast<std::size_t>(n) * static_cast<std::size_t>(k));
  std::vector<NodeId> sizes(static_cast<std::size_t>(k));

  for (int t = 1; t <= cfg.max_iterations; ++t) {
    for (NodeId i = 0; i < n; ++i) {
      for (ShardId j = 0; j < k; ++j) {
        pairs[static_cast<std::size_t>(i) * static_cast<std::size_t>(k) + static_cast<std::size_t>(j)] = {
            (embeddings.row(i) - centroids.row(j)).norm(), i, j};
      }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
      if (x.dist != y.dist) return x.dist < y.dist;
      if (x.node != y.node) return x.node < y.node;
      return x.shard < y.shard;
    });

    a.assign.assign(static_cast<std::size_t>(n), -1);
    std::fill(sizes.begin(), sizes.end(), 0);
    for (const auto& p : pairs) {
      auto& slot = a.assign[static_cast<std::size_t>(p.node)];
      if (slot != -1 || sizes[static_cast<std::size_t>(p.shard)] >= delta) continue;
      slot = p.shard;
      ++sizes[static_cast<std::size_t>(p.shard)];
    }

    Matrix next = Matrix::Zero(k, embeddings.cols());
    for (NodeId i = 0; i < n; ++i) next.row(a.assign[static_cast<std::size_t>(i)]) += embeddings.row(i);
    std::vector<bool> used_for_reseed(static_cast<std::size_t>(n), false);
    for (ShardId j = 0; j < k; ++j) {
      if (sizes[static_cast<std::size_t>(j)] > 0) next.row(j) /= static_cast<double>(sizes[static_cast<std::size_t>(j)]);
    }
    for (ShardId j = 0; j < k; ++j) {
      if (sizes[static_cast<std::size_t>(j)] > 0) continue;
      NodeId far = -1;
      double far_dist = -1.0;
      for (NodeId i = 0; i < n; ++i) {
        if (used_for_reseed[static_cast<std::size_t>(i)]) continue;
        const double d = (embeddings.row(i) - next.row(a.assign[static_cast<std::size_t>(i)])).norm();
        if (d > far_dist) {
          far_dist = d;
          far = i;
        }
      }
      used_for_reseed[static_cast<std::size_t>(far)] = true;
      next.row(j) = embeddings.row(far);
      ++a.reseeded_centroids;
    }

    const double shift = (next - centroids).rowwise().norm().maxCoeff();
    centroids = std::move(next);
    a.iterations_run = t;
    if (shift <= cfg.bekm_tol) {
      a.converged = true;
      break;
    }
  }
  return a;
}

ShardAssignment partition(const Graph& g, const EmbeddingSet* embeddings, const PartitionConfig& cfg) {
  switch (cfg.method) {
    case PartitionMethod::kRandom: {
      cfg.validate();
      return random_partition(g.num_nodes(), cfg.k, cfg.seed);
    }
    case PartitionMethod::kBlpa:
      return blpa(g, cfg);
    case PartitionMethod::kBekm:
      if (!embeddings) throw ConfigError("BEKM partitioning needs node embeddings");
      if (embeddings->rows() != g.num_nodes()) throw ConfigError("embedding rows do not match node count");
      return bekm(*embeddings, cfg);
  }
  throw ConfigError("unknown partition method");
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw ConfigError("labelings differ in length");
  std::map<std::pair<int, int>, long long> joint;
  std::map<int, long long> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++joint[{a[i], b[i]}];
    ++rows[a[i]];
    ++cols[b[i]];
  }
  auto pairs = [](long long x) { return static_cast<double>(x) * static_cast<double>(x - 1) / 2.0; };
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, c] : joint) index += pairs(c);
  for (const auto& [key, c] : rows) sum_rows += pairs(c);
  for (const auto& [key, c] : cols) sum_cols += pairs(c);
  const double total = pairs(static_cast<long long>(a.size()));
  if (total == 0.0) return 1.0;
  const double expected = sum_rows * sum_cols / total;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

void save_assignment(const ShardAssignment& a, const std::filesystem::path& path) {
  detail::Json doc;
  doc["k"] = a.k;
  doc["delta"] = a.delta;
  doc["method"] = to_string(a.method);
  doc["seed"] = a.seed;
  doc["assign"] = a.assign;
  doc["iterations_run"] = a.iterations_run;
  doc["converged"] = a.converged;
  doc["reseeded_centroids"] = a.reseeded_centroids;
  detail::write_document(path, doc);
}

ShardAssignment load_assignment(const std::filesystem::path& path) {
  const auto doc = detail::read_document(path);
  ShardAssignment a;
  try {
    a.k = doc.at("k").get<int>();
    a.delta = doc.at("delta").get<NodeId>();
    a.method = parse_partition_method(doc.at("method").get<std::string>());
    a.seed = doc.at("seed").get<std::uint64_t>();
    a.assign = doc.at("assign").get<std::vector<ShardId>>();
    a.iterations_run = doc.at("iterations_run").get<int>();
    a.converged = doc.at("converged").get<bool>();
    a.reseeded_centroids = doc.value("reseeded_centroids", 0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  validate(a, a.num_nodes());
  return a;
}

}  // namespace gerk
