#include "gerk/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>

#include "gerk/error.hpp"
#include "gerk/hash.hpp"

namespace gerk {

std::string to_string(Aggregator a) {
  switch (a) {
    case Aggregator::kGin: return "gin";
    case Aggregator::kSage: return "sage";
    case Aggregator::kGcn: return "gcn";
    case Aggregator::kGat: return "gat";
  }
  return "?";
}

std::string to_string(Updater u) {
  switch (u) {
    case Updater::kLinear: return "linear";
    case Updater::kConcat: return "concat";
    case Updater::kInterpolation: return "interpolation";
  }
  return "?";
}

Aggregator parse_aggregator(const std::string& s) {
  for (Aggregator a : kAllAggregators) {
    if (to_string(a) == s) return a;
  }
  throw ConfigError("unknown aggregator '" + s + "'");
}

Updater parse_updater(const std::string& s) {
  for (Updater u : kAllUpdaters) {
    if (to_string(u) == s) return u;
  }
  if (s == "interp") return Updater::kInterpolation;
  throw ConfigError("unknown updater '" + s + "'");
}

void GnnConfig::validate() const {
  if (layers < 1) throw ConfigError("layers must be >= 1");
  if (hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!(grad_clip >= 0.0)) throw ConfigError("grad_clip must be >= 0");
}

// --- parameter plumbing ----------------------------------------------------

std::size_t parameter_count(const GnnModel& model) {
  std::size_t count = 0;
  for_each_parameter(model, [&](auto block, bool) { count += block.size(); });
  return count;
}

std::vector<Scalar> flatten_parameters(const GnnModel& model) {
  std::vector<Scalar> out;
  out.reserve(parameter_count(model));
  for_each_parameter(model, [&](auto block, bool) { out.insert(out.end(), block.begin(), block.end()); });
  return out;
}

void assign_parameters(GnnModel& model, std::span<const Scalar> values) {
  if (values.size() != parameter_count(model)) throw ConfigError("parameter vector has the wrong length");
  std::size_t offset = 0;
  for_each_parameter(model, [&](std::span<Scalar> block, bool) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(offset), block.size(), block.begin());
    offset += block.size();
  });
}

std::uint64_t parameter_hash(const GnnModel& model) {
  Fnv1a h;
  for_each_parameter(model, [&](auto block, bool) { h.add(block.data(), block.size_bytes()); });
  return h.value();
}

bool parameters_equal(const GnnModel& a, const GnnModel& b) {
  const auto pa = flatten_parameters(a);
  const auto pb = flatten_parameters(b);
  return pa.size() == pb.size() &&
         std::memcmp(pa.data(), pb.data(), pa.size() * sizeof(Scalar)) == 0;
}

namespace {

Matrix glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

}  // namespace

GnnModel init_model(const GnnConfig& cfg, int input_dim, int num_classes) {
  cfg.validate();
  if (input_dim < 1) throw ConfigError("input dimension must be >= 1");
  if (num_classes < 1) throw ConfigError("num_classes must be >= 1");
  std::mt19937_64 rng(cfg.seed);

  GnnModel model;
  model.config = cfg;
  model.input_dim = input_dim;
  model.num_classes = num_classes;
  Eigen::Index width = input_dim;
  for (int l = 0; l < cfg.layers; ++l) {
    GnnLayer layer;
    layer.w_self = glorot(width, cfg.hidden_dim, rng);
    layer.w_neigh = glorot(width, cfg.hidden_dim, rng);
    if (cfg.aggregator == Aggregator::kGat) {
      layer.att_w = glorot(width, cfg.hidden_dim, rng);
      layer.att_a = glorot(2 * cfg.hidden_dim, 1, rng).col(0);
    }
    width = layer.out_dim(cfg.updater);
    model.layers.push_back(std::move(layer));
  }
  model.classifier = glorot(width, num_classes, rng);
  model.classifier_bias = Vector::Zero(num_classes);
  return model;
}

// --- message graph ---------------------------------------------------------

MessageGraph::MessageGraph(const Graph& g) {
  const NodeId n = g.num_nodes();
  row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (NodeId u = 0; u < n; ++u) {
    row_ptr_[static_cast<std::size_t>(u) + 1] = row_ptr_[static_cast<std::size_t>(u)] + static_cast<std::int64_t>(g.degree(u));
  }
  col_.reserve(static_cast<std::size_t>(row_ptr_.back()));
  for (NodeId u = 0; u < n; ++u) col_.insert(col_.end(), g.neighbors(u).begin(), g.neighbors(u).end());

  std::vector<Eigen::Triplet<Scalar>> sum, mean, sym;
  sum.reserve(col_.size());
  mean.reserve(col_.size());
  sym.reserve(col_.size());
  for (NodeId u = 0; u < n; ++u) {
    const double du = static_cast<double>(g.degree(u));
    for (NodeId v : g.neighbors(u)) {
      const double dv = static_cast<double>(g.degree(v));
      sum.emplace_back(u, v, 1.0);
      mean.emplace_back(u, v, 1.0 / du);
      sym.emplace_back(u, v, 1.0 / std::sqrt(du * dv));
    }
  }
  sum_.resize(n, n);
  mean_.resize(n, n);
  sym_.resize(n, n);
  sum_.setFromTriplets(sum.begin(), sum.end());
  mean_.setFromTriplets(mean.begin(), mean.end());
  sym_.setFromTriplets(sym.begin(), sym.end());
}

const SparseMatrix& MessageGraph::op(Aggregator a) const {
  switch (a) {
    case Aggregator::kGin: return sum_;
    case Aggregator::kSage: return mean_;
    case Aggregator::kGcn: return sym_;
    case Aggregator::kGat: break;
  }
  throw ConfigError("GAT has no fixed aggregation operator");
}

// --- single-node reference operations --------------------------------------

namespace {

constexpr double kLeakySlope = 0.2;

double attention_logit(double raw, bool leaky) { return leaky && raw < 0.0 ? kLeakySlope * raw : raw; }

void check_embedding_rows(const Matrix& e, const Graph& g) {
  if (e.rows() != g.num_nodes()) throw ConfigError("embedding rows do not match node count");
}

}  // namespace

Vector gat_attention(NodeId u, const Matrix& embeddings, const Graph& g, const GnnLayer& params, bool gat_leaky) {
  check_embedding_rows(embeddings, g);
  if (params.att_w.rows() != embeddings.cols() || params.att_a.size() != 2 * params.att_w.cols()) {
    throw ConfigError("GAT parameter shapes do not match the embedding width");
  }
  const auto& nbrs = g.neighbors(u);
  const Eigen::Index h = params.att_w.cols();
  const Vector wu = params.att_w.transpose() * embeddings.row(u).transpose();
  Vector logits(static_cast<Eigen::Index>(nbrs.size()));
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    const Vector wv = params.att_w.transpose() * embeddings.row(nbrs[i]).transpose();
    const double raw = params.att_a.head(h).dot(wu) + params.att_a.tail(h).dot(wv);
    logits(static_cast<Eigen::Index>(i)) = attention_logit(raw, gat_leaky);
  }
  if (logits.size() == 0) return logits;
  const Vector ex = (logits.array() - logits.maxCoeff()).exp();
  return ex / ex.sum();
}

Vector aggregate(Aggregator kind, NodeId u, const Matrix& embeddings, const Graph& g, const GnnLayer* gat_params,
                 bool gat_leaky) {
  check_embedding_rows(embeddings, g);
  if (!g.contains(u)) throw LookupError("unknown node " + std::to_string(u));
  const auto& nbrs = g.neighbors(u);
  Vector m = Vector::Zero(embeddings.cols());
  if (nbrs.empty()) return m;
  switch (kind) {
    case Aggregator::kGin:
      for (NodeId v : nbrs) m += embeddings.row(v).transpose();
      break;
    case Aggregator::kSage:
      for (NodeId v : nbrs) m += embeddings.row(v).transpose();
      m /= static_cast<double>(nbrs.size());
      break;
    case Aggregator::kGcn:
      for (NodeId v : nbrs) {
        m += embeddings.row(v).transpose() / std::sqrt(static_cast<double>(nbrs.size() * g.degree(v)));
      }
      break;
    case Aggregator::kGat: {
      if (!gat_params) throw ConfigError("GAT aggregation needs attention parameters");
      const Vector alpha = gat_attention(u, embeddings, g, *gat_params, gat_leaky);
      for (std::size_t i = 0; i < nbrs.size(); ++i) {
        m += alpha(static_cast<Eigen::Index>(i)) * embeddings.row(nbrs[i]).transpose();
      }
      break;
    }
  }
  return m;
}

namespace {

// Interpolation mixes E_u into a hidden-width output; a narrower input is
// zero-padded, a wider one truncated.
Matrix fit_width(const Matrix& h, Eigen::Index width) {
  Matrix out = Matrix::Zero(h.rows(), width);
  const Eigen::Index common = std::min(width, h.cols());
  out.leftCols(common) = h.leftCols(common);
  return out;
}

}  // namespace

Vector update(Updater kind, const Vector& self, const Vector& message, const GnnLayer& layer) {
  if (self.size() != layer.in_dim() || message.size() != layer.in_dim()) {
    throw ConfigError("update: embedding width does not match layer input");
  }
  const Vector lin =
      (layer.w_self.transpose() * self + layer.w_neigh.transpose() * message).cwiseMax(0.0);
  switch (kind) {
    case Updater::kLinear: return lin;
    case Updater::kConcat: {
      Vector out(lin.size() + self.size());
      out << lin, self;
      return out;
    }
    case Updater::kInterpolation: {
      const Matrix padded = fit_width(self.transpose(), lin.size());
      return layer.alpha1 * lin + layer.alpha2 * padded.row(0).transpose();
    }
  }
  return lin;
}

// --- batched forward / backward --------------------------------------------

namespace {

struct LayerCache {
  Matrix input;    // H
  Matrix message;  // M
  Matrix pre;      // Z = H W_self + M W_neigh
  Matrix linear;   // relu(Z)
  Matrix proj;     // GAT: P = H W_att
  std::vector<double> raw_logit;  // GAT, per directed edge
  std::vector<double> attn;       // GAT, per directed edge
};

struct ForwardCache {
  std::vector<LayerCache> layers;
  Matrix embedding;
  Matrix probs;
};

Matrix gat_messages(const MessageGraph& mg, const Matrix& h, const GnnLayer& layer, bool leaky, LayerCache& c) {
  const NodeId n = mg.num_nodes();
  const Eigen::Index hid = layer.att_w.cols();
  c.proj = h * layer.att_w;
  const Vector s = c.proj * layer.att_a.head(hid);
  const Vector t = c.proj * layer.att_a.tail(hid);
  c.raw_logit.assign(mg.num_directed_edges(), 0.0);
  c.attn.assign(mg.num_directed_edges(), 0.0);

  Matrix m = Matrix::Zero(n, h.cols());
  for (NodeId u = 0; u < n; ++u) {
    const auto nbrs = mg.neighbors(u);
    if (nbrs.empty()) continue;
    const std::size_t base = mg.edge_begin(u);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      const double raw = s(u) + t(nbrs[i]);
      c.raw_logit[base + i] = raw;
      peak = std::max(peak, attention_logit(raw, leaky));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      c.attn[base + i] = std::exp(attention_logit(c.raw_logit[base + i], leaky) - peak);
      total += c.attn[base + i];
    }
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      c.attn[base + i] /= total;
      m.row(u) += c.attn[base + i] * h.row(nbrs[i]);
    }
  }
  return m;
}

Matrix layer_forward(const GnnConfig& cfg, const GnnLayer& layer, const MessageGraph& mg, Matrix h, LayerCache& c) {
  if (h.cols() != layer.in_dim()) throw ConfigError("layer input width mismatch");
  c.message = cfg.aggregator == Aggregator::kGat ? gat_messages(mg, h, layer, cfg.gat_leaky, c)
                                                 : Matrix(mg.op(cfg.aggregator) * h);
  c.pre = h * layer.w_self + c.message * layer.w_neigh;
  c.linear = c.pre.cwiseMax(0.0);
  Matrix out;
  switch (cfg.updater) {
    case Updater::kLinear:
      out = c.linear;
      break;
    case Updater::kConcat:
      out.resize(h.rows(), c.linear.cols() + h.cols());
      out << c.linear, h;
      break;
    case Updater::kInterpolation:
      out = layer.alpha1 * c.linear + layer.alpha2 * fit_width(h, c.linear.cols());
      break;
  }
  c.input = std::move(h);
  return out;
}

void softmax_rows(Matrix& logits) {
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double peak = logits.row(r).maxCoeff();
    logits.row(r) = (logits.row(r).array() - peak).exp();
    logits.row(r) /= logits.row(r).sum();
  }
}

ForwardCache run_forward(const GnnModel& model, const Graph& g, const MessageGraph& mg) {
  if (g.feature_dim() != model.input_dim) {
    throw ConfigError("graph has " + std::to_string(g.feature_dim()) + " features, model expects " +
                      std::to_string(model.input_dim));
  }
  ForwardCache cache;
  cache.layers.resize(model.layers.size());
  Matrix h = g.features;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    h = layer_forward(model.config, model.layers[l], mg, std::move(h), cache.layers[l]);
  }
  cache.embedding = std::move(h);
  cache.probs = cache.embedding * model.classifier;
  cache.probs.rowwise() += model.classifier_bias.transpose();
  softmax_rows(cache.probs);
  return cache;
}

GnnModel zeros_like(const GnnModel& model) {
  GnnModel grad = model;
  grad.loss_trace.clear();
  for_each_parameter(grad, [](std::span<Scalar> block, bool) { std::fill(block.begin(), block.end(), 0.0); });
  return grad;
}

void gat_backward(const MessageGraph& mg, const GnnLayer& layer, const LayerCache& c, const Matrix& d_message,
                  bool leaky, GnnLayer& grad, Matrix& d_input) {
  const NodeId n = mg.num_nodes();
  const Eigen::Index hid = layer.att_w.cols();
  Vector ds = Vector::Zero(n);
  Vector dt = Vector::Zero(n);
  std::vector<double> d_attn(mg.num_directed_edges());
  for (NodeId u = 0; u < n; ++u) {
    const auto nbrs = mg.neighbors(u);
    if (nbrs.empty()) continue;
    const std::size_t base = mg.edge_begin(u);
    double weighted = 0.0;
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      const NodeId v = nbrs[i];
      d_attn[base + i] = d_message.row(u).dot(c.input.row(v));
      d_input.row(v) += c.attn[base + i] * d_message.row(u);
      weighted += c.attn[base + i] * d_attn[base + i];
    }
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      double de = c.attn[base + i] * (d_attn[base + i] - weighted);
      if (leaky && c.raw_logit[base + i] < 0.0) de *= kLeakySlope;
      ds(u) += de;
      dt(nbrs[i]) += de;
    }
  }
  grad.att_a.head(hid) += c.proj.transpose() * ds;
  grad.att_a.tail(hid) += c.proj.transpose() * dt;
  const Matrix d_proj = ds * layer.att_a.head(hid).transpose() + dt * layer.att_a.tail(hid).transpose();
  grad.att_w += c.input.transpose() * d_proj;
  d_input += d_proj * layer.att_w.transpose();
}

}  // namespace

PosteriorMatrix forward(const GnnModel& model, const Graph& g) {
  const MessageGraph mg(g);
  return run_forward(model, g, mg).probs;
}

PosteriorMatrix forward(const GnnModel& model, const Graph& g, std::span<const NodeId> query_nodes) {
  const Matrix all = forward(model, g);
  PosteriorMatrix out(static_cast<Eigen::Index>(query_nodes.size()), all.cols());
  for (std::size_t i = 0; i < query_nodes.size(); ++i) {
    if (!g.contains(query_nodes[i])) throw LookupError("unknown query node " + std::to_string(query_nodes[i]));
    out.row(static_cast<Eigen::Index>(i)) = all.row(query_nodes[i]);
  }
  return out;
}

Matrix embeddings(const GnnModel& model, const Graph& g) {
  const MessageGraph mg(g);
  return run_forward(model, g, mg).embedding;
}

LossGradient gradient(const GnnModel& model, const Graph& g, std::span<const NodeId> batch) {
  const MessageGraph mg(g);
  return gradient(model, g, mg, batch);
}

LossGradient gradient(const GnnModel& model, const Graph& g, const MessageGraph& mg, std::span<const NodeId> batch) {
  if (batch.empty()) throw ConfigError("gradient batch is empty");
  const ForwardCache cache = run_forward(model, g, mg);
  const GnnConfig& cfg = model.config;

  LossGradient out;
  out.gradient = zeros_like(model);
  GnnModel& grad = out.gradient;

  const double scale = 1.0 / static_cast<double>(batch.size());
  Matrix d_logits = Matrix::Zero(cache.probs.rows(), cache.probs.cols());
  for (NodeId u : batch) {
    if (!g.contains(u)) throw LookupError("batch node " + std::to_string(u) + " not in graph");
    const Label y = g.labels[static_cast<std::size_t>(u)];
    out.loss -= std::log(std::max(cache.probs(u, y), 1e-300)) * scale;
    d_logits.row(u) += cache.probs.row(u) * scale;
    d_logits(u, y) -= scale;
  }

  grad.classifier = cache.embedding.transpose() * d_logits;
  grad.classifier_bias = d_logits.colwise().sum().transpose();
  Matrix d_out = d_logits * model.classifier.transpose();

  for (std::size_t li = model.layers.size(); li-- > 0;) {
    const GnnLayer& layer = model.layers[li];
    const LayerCache& c = cache.layers[li];
    GnnLayer& gl = grad.layers[li];
    const Eigen::Index hid = c.linear.cols();

    Matrix d_input = Matrix::Zero(c.input.rows(), c.input.cols());
    Matrix d_linear;
    switch (cfg.updater) {
      case Updater::kLinear:
        d_linear = std::move(d_out);
        break;
      case Updater::kConcat:
        d_linear = d_out.leftCols(hid);
        d_input += d_out.rightCols(c.input.cols());
        break;
      case Updater::kInterpolation: {
        d_linear = layer.alpha1 * d_out;
        const Matrix padded = fit_width(c.input, hid);
        gl.alpha1 += d_out.cwiseProduct(c.linear).sum();
        gl.alpha2 += d_out.cwiseProduct(padded).sum();
        const Eigen::Index common = std::min(hid, c.input.cols());
        d_input.leftCols(common) += layer.alpha2 * d_out.leftCols(common);
        break;
      }
    }

    const Matrix d_pre = d_linear.cwiseProduct((c.pre.array() > 0.0).cast<Scalar>().matrix());
    gl.w_self += c.input.transpose() * d_pre;
    gl.w_neigh += c.message.transpose() * d_pre;
    const Matrix d_message = d_pre * layer.w_neigh.transpose();
    if (cfg.aggregator == Aggregator::kGat) {
      gat_backward(mg, layer, c, d_message, cfg.gat_leaky, gl, d_input);
    }
    if (li == 0) break;  // no gradient needed w.r.t. the raw features

    d_input += d_pre * layer.w_self.transpose();
    if (cfg.aggregator != Aggregator::kGat) d_input += mg.op(cfg.aggregator).transpose() * d_message;
    d_out = std::move(d_input);
  }
  return out;
}

GnnModel train(const Graph& g, const GnnConfig& cfg) {
  if (g.num_nodes() == 0) throw ConfigError("cannot train on an empty graph");
  GnnModel model = init_model(cfg, static_cast<int>(g.feature_dim()), g.num_classes);
  const MessageGraph mg(g);
  NodeList batch(static_cast<std::size_t>(g.num_nodes()));
  std::iota(batch.begin(), batch.end(), 0);

  std::vector<Scalar> velocity(parameter_count(model), 0.0);
  model.loss_trace.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    LossGradient lg = gradient(model, g, mg, batch);
    model.loss_trace.push_back(lg.loss);

    std::vector<std::span<Scalar>> grads;
    double norm_sq = 0.0;
    for_each_parameter(lg.gradient, [&](std::span<Scalar> block, bool) {
      grads.push_back(block);
      for (Scalar x : block) norm_sq += x * x;
    });
    const double norm = std::sqrt(norm_sq);
    const double scale = cfg.grad_clip > 0.0 && norm > cfg.grad_clip ? cfg.grad_clip / norm : 1.0;
    std::size_t block_index = 0;
    std::size_t offset = 0;
    for_each_parameter(model, [&](std::span<Scalar> block, bool decayed) {
      const auto& gb = grads[block_index++];
      for (std::size_t i = 0; i < block.size(); ++i) {
        double& v = velocity[offset + i];
        v = cfg.momentum * v + scale * gb[i];
        if (decayed) block[i] -= cfg.learning_rate * cfg.weight_decay * block[i];
        block[i] -= cfg.learning_rate * v;
      }
      offset += block.size();
    });
  }
  return model;
}

Matrix node_embeddings(const Graph& g, const GnnConfig& cfg) {
  return embeddings(train(g, cfg), g);
}

LabelList argmax_rows(const Matrix& p) {
  LabelList out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < p.cols(); ++c) {
      if (p(r, c) > p(r, best)) best = c;
    }
    out[static_cast<std::size_t>(r)] = static_cast<Label>(best);
  }
  return out;
}

}  // namespace gerk
