#include "gerk/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gerk/error.hpp"
#include "json_util.hpp"

namespace gerk {

void validate(const ShardPosteriors& sp) {
  if (sp.empty()) throw InvariantError("no shard posteriors");
  const auto rows = sp.front().rows();
  const auto cols = sp.front().cols();
  for (std::size_t i = 0; i < sp.size(); ++i) {
    const auto& p = sp[i];
    if (p.rows() != rows || p.cols() != cols) {
      throw InvariantError("shard " + std::to_string(i) + " posterior shape differs");
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (std::abs(p.row(r).sum() - 1.0) > 1e-6 || p.row(r).minCoeff() < 0.0) {
        throw InvariantError("shard " + std::to_string(i) + " posterior row " + std::to_string(r) +
                             " is not stochastic");
      }
    }
  }
}

PosteriorMatrix weighted_sum(const ShardPosteriors& sp, const Vector& alpha) {
  if (sp.empty()) throw ConfigError("no shard posteriors");
  if (alpha.size() != static_cast<Eigen::Index>(sp.size())) {
    throw ConfigError("alpha length " + std::to_string(alpha.size()) + " does not match " +
                      std::to_string(sp.size()) + " shards");
  }
  PosteriorMatrix out = PosteriorMatrix::Zero(sp.front().rows(), sp.front().cols());
  for (std::size_t i = 0; i < sp.size(); ++i) {
    if (sp[i].rows() != out.rows() || sp[i].cols() != out.cols()) {
      throw ConfigError("shard posterior shapes differ");
    }
    out += alpha(static_cast<Eigen::Index>(i)) * sp[i];
  }
  return out;
}

PosteriorMatrix mean_aggr(const ShardPosteriors& sp) {
  const auto m = static_cast<Eigen::Index>(sp.size());
  return weighted_sum(sp, Vector::Constant(m, 1.0 / static_cast<double>(std::max<Eigen::Index>(m, 1))));
}

LabelList maj_aggr(const ShardPosteriors& sp) {
  if (sp.empty()) throw ConfigError("no shard posteriors");
  const auto rows = sp.front().rows();
  const auto cols = sp.front().cols();
  std::vector<LabelList> votes;
  for (const auto& p : sp) {
    if (p.rows() != rows || p.cols() != cols) throw ConfigError("shard posterior shapes differ");
    votes.push_back(argmax_rows(p));
  }
  LabelList out(static_cast<std::size_t>(rows));
  std::vector<int> counts(static_cast<std::size_t>(cols));
  for (Eigen::Index r = 0; r < rows; ++r) {
    std::fill(counts.begin(), counts.end(), 0);
    for (const auto& v : votes) ++counts[static_cast<std::size_t>(v[static_cast<std::size_t>(r)])];
    out[static_cast<std::size_t>(r)] =
        static_cast<Label>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  }
  return out;
}

LabelList weighted_predict(const ShardPosteriors& sp, const Vector& alpha) {
  return argmax_rows(weighted_sum(sp, alpha));
}

std::string to_string(AggregationMode m) {
  switch (m) {
    case AggregationMode::kMean: return "mean";
    case AggregationMode::kMajority: return "majority";
    case AggregationMode::kOptimal: return "optimal";
  }
  return "?";
}

AggregationMode parse_aggregation_mode(const std::string& s) {
  if (s == "mean") return AggregationMode::kMean;
  if (s == "majority" || s == "maj") return AggregationMode::kMajority;
  if (s == "optimal" || s == "opt") return AggregationMode::kOptimal;
  throw ConfigError("unknown aggregation mode '" + s + "'");
}

void OptAggrConfig::validate() const {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("score learning_rate must be > 0");
  if (epochs < 1) throw ConfigError("score epochs must be >= 1");
  if (!(subset_frac > 0.0 && subset_frac <= 1.0)) throw ConfigError("subset_frac must lie in (0, 1]");
}

bool ImportanceScores::contains(NodeId u) const {
  return std::binary_search(score_train_nodes.begin(), score_train_nodes.end(), u);
}

void validate(const ImportanceScores& s, int num_shards) {
  if (s.alpha.size() != num_shards) {
    throw InvariantError("alpha has " + std::to_string(s.alpha.size()) + " entries for " +
                         std::to_string(num_shards) + " shards");
  }
  if (s.alpha.size() > 0 && s.alpha.minCoeff() < 0.0) throw InvariantError("negative importance score");
  if (std::abs(s.alpha.sum() - 1.0) > 1e-6) throw InvariantError("importance scores do not sum to 1");
}

NodeList sample_score_nodes(std::span<const NodeId> train_nodes, double frac, std::uint64_t seed) {
  if (train_nodes.empty()) return {};
  const auto want = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(frac * static_cast<double>(train_nodes.size()))), 1,
      train_nodes.size());
  NodeList pool(train_nodes.begin(), train_nodes.end());
  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(want);
  std::sort(pool.begin(), pool.end());
  return pool;
}

namespace {

Vector softmax(const Vector& x) {
  if (x.size() == 0) return x;
  Vector e = (x.array() - x.maxCoeff()).exp().matrix();
  return e / e.sum();
}

// Probability each shard assigns to the true label, one row per node.
Matrix truth_probabilities(const ShardPosteriors& sp, std::span<const Label> labels) {
  const auto rows = sp.front().rows();
  if (static_cast<std::size_t>(rows) != labels.size()) throw ConfigError("label count does not match posteriors");
  Matrix t(rows, static_cast<Eigen::Index>(sp.size()));
  for (std::size_t i = 0; i < sp.size(); ++i) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      t(r, static_cast<Eigen::Index>(i)) = sp[i](r, labels[static_cast<std::size_t>(r)]);
    }
  }
  return t;
}

constexpr double kProbFloor = 1e-12;

double cross_entropy(const Matrix& truth, const Vector& alpha) {
  const Vector q = truth * alpha;
  double loss = 0.0;
  for (Eigen::Index r = 0; r < q.size(); ++r) loss -= std::log(std::max(q(r), kProbFloor));
  return q.size() > 0 ? loss / static_cast<double>(q.size()) : 0.0;
}

}  // namespace

double aggregation_loss(const ShardPosteriors& sp, std::span<const Label> labels, const Vector& alpha) {
  if (sp.empty()) throw ConfigError("no shard posteriors");
  return cross_entropy(truth_probabilities(sp, labels), alpha);
}

ImportanceScores fit_importance_scores(const ShardPosteriors& sp, std::span<const Label> labels,
                                       const OptAggrConfig& cfg,
                                       const std::function<void(int, const Vector&)>& on_epoch) {
  cfg.validate();
  if (sp.empty()) throw ConfigError("no shard posteriors");
  const Matrix truth = truth_probabilities(sp, labels);
  const auto m = static_cast<Eigen::Index>(sp.size());
  const auto n = truth.rows();

  ImportanceScores s;
  s.lambda = cfg.lambda;
  s.subset_frac = cfg.subset_frac;
  s.seed = cfg.seed;
  s.pre_scores = Vector::Zero(m);
  s.alpha = softmax(s.pre_scores);

  auto objective = [&](const Vector& theta, const Vector& alpha) {
    return cross_entropy(truth, alpha) + cfg.lambda * theta.cwiseAbs().sum();
  };
  s.loss_trace.push_back(objective(s.pre_scores, s.alpha));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Vector grad_alpha = Vector::Zero(m);
    if (n > 0) {
      const Vector q = truth * s.alpha;
      for (Eigen::Index r = 0; r < n; ++r) {
        grad_alpha -= truth.row(r).transpose() / std::max(q(r), kProbFloor);
      }
      grad_alpha /= static_cast<double>(n);
    }
    // Chain through the softmax: d alpha_i / d theta_j = alpha_i (delta_ij - alpha_j).
    const double mean_grad = s.alpha.dot(grad_alpha);
    Vector grad_theta = s.alpha.cwiseProduct((grad_alpha.array() - mean_grad).matrix());
    for (Eigen::Index j = 0; j < m; ++j) grad_theta(j) += cfg.lambda * (s.pre_scores(j) < 0.0 ? -1.0 : 1.0);

    s.pre_scores -= cfg.learning_rate * grad_theta;
    if (cfg.clamp) s.pre_scores = s.pre_scores.cwiseMax(0.0);
    s.alpha = softmax(s.pre_scores);
    s.loss_trace.push_back(objective(s.pre_scores, s.alpha));
    s.epochs_run = epoch + 1;
    if (on_epoch) on_epoch(epoch, s.alpha);
  }
  return s;
}

ImportanceScores opt_aggr_train(std::span<const GnnModel> shard_models, const Graph& g,
                                std::span<const NodeId> train_nodes, const OptAggrConfig& cfg) {
  cfg.validate();
  if (shard_models.empty()) throw ConfigError("opt_aggr_train needs at least one shard model");
  const NodeList nodes = sample_score_nodes(train_nodes, cfg.subset_frac, cfg.seed);
  ShardPosteriors sp;
  for (const auto& model : shard_models) sp.push_back(forward(model, g, nodes));
  LabelList labels;
  for (NodeId u : nodes) labels.push_back(g.labels[static_cast<std::size_t>(u)]);
  ImportanceScores s = fit_importance_scores(sp, labels, cfg);
  s.score_train_nodes = nodes;
  return s;
}

void save_scores(const ImportanceScores& s, const std::filesystem::path& path) {
  detail::Json doc;
  doc["alpha"] = std::vector<double>(s.alpha.data(), s.alpha.data() + s.alpha.size());
  doc["pre_scores"] = std::vector<double>(s.pre_scores.data(), s.pre_scores.data() + s.pre_scores.size());
  doc["lambda"] = s.lambda;
  doc["subset_frac"] = s.subset_frac;
  doc["score_train_nodes"] = s.score_train_nodes;
  doc["seed"] = s.seed;
  doc["epochs_run"] = s.epochs_run;
  doc["loss_trace"] = s.loss_trace;
  detail::write_document(path, doc);
}

ImportanceScores load_scores(const std::filesystem::path& path) {
  const auto doc = detail::read_document(path);
  ImportanceScores s;
  try {
    const auto alpha = doc.at("alpha").get<std::vector<double>>();
    s.alpha = Eigen::Map<const Vector>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
    const auto pre = doc.value("pre_scores", std::vector<double>(alpha.size(), 0.0));
    s.pre_scores = Eigen::Map<const Vector>(pre.data(), static_cast<Eigen::Index>(pre.size()));
    s.lambda = doc.at("lambda").get<double>();
    s.subset_frac = doc.at("subset_frac").get<double>();
    s.score_train_nodes = doc.at("score_train_nodes").get<NodeList>();
    s.seed = doc.at("seed").get<std::uint64_t>();
    s.epochs_run = doc.at("epochs_run").get<int>();
    s.loss_trace = doc.at("loss_trace").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return s;
}

}  // namespace gerk
