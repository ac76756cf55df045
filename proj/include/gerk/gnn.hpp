#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gerk/graph.hpp"
#include "gerk/types.hpp"

namespace gerk {

enum class Aggregator { kGin, kSage, kGcn, kGat };
enum class Updater { kLinear, kConcat, kInterpolation };

std::string to_string(Aggregator a);
std::string to_string(Updater u);
Aggregator parse_aggregator(const std::string& s);
Updater parse_updater(const std::string& s);

inline constexpr Aggregator kAllAggregators[] = {Aggregator::kGin, Aggregator::kSage, Aggregator::kGcn,
                                                 Aggregator::kGat};
inline constexpr Updater kAllUpdaters[] = {Updater::kLinear, Updater::kConcat, Updater::kInterpolation};

struct GnnConfig {
  Aggregator aggregator = Aggregator::kSage;
  Updater updater = Updater::kLinear;
  int layers = 2;
  int hidden_dim = 16;
  int epochs = 100;
  double learning_rate = 0.2;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  double grad_clip = 1.0;  // global gradient-norm cap, 0 disables
  std::uint64_t seed = 0;
  bool gat_leaky = false;  // LeakyReLU(0.2) inside the attention logit

  void validate() const;
};

/// Parameters of one message-passing module. Weight matrices are stored
/// input-major (d_in x d_out) so a layer is `H * W` over node-major H.
struct GnnLayer {
  Matrix w_self;
  Matrix w_neigh;
  Matrix att_w;  // GAT only: d_in x hidden
  Vector att_a;  // GAT only: [a_self; a_neigh], length 2 * hidden
  Scalar alpha1 = 0.5;  // interpolation gates
  Scalar alpha2 = 0.5;

  Eigen::Index in_dim() const { return w_self.rows(); }
  Eigen::Index out_dim(Updater u) const {
    return u == Updater::kConcat ? w_self.cols() + w_self.rows() : w_self.cols();
  }
};

struct GnnModel {
  GnnConfig config;
  int input_dim = 0;
  int num_classes = 0;
  std::vector<GnnLayer> layers;
  Matrix classifier;     // d_E x C
  Vector classifier_bias;  // C
  std::vector<double> loss_trace;

  Eigen::Index embedding_dim() const { return classifier.rows(); }
};

/// Visits every trainable block as a flat span, in a fixed order.
/// Also used on the gradient, which shares the model's layout.
template <typename Model, typename F>
void for_each_parameter(Model& model, F&& fn);

std::size_t parameter_count(const GnnModel& model);
std::vector<Scalar> flatten_parameters(const GnnModel& model);
void assign_parameters(GnnModel& model, std::span<const Scalar> values);
/// FNV-1a over the raw parameter bytes; equal models hash equal.
std::uint64_t parameter_hash(const GnnModel& model);
bool parameters_equal(const GnnModel& a, const GnnModel& b);

/// Randomly initialised (Glorot-uniform) model for the given shapes.
GnnModel init_model(const GnnConfig& cfg, int input_dim, int num_classes);

/// Sparse neighbor structure of a graph, prepared once per graph.
class MessageGraph {
 public:
  explicit MessageGraph(const Graph& g);

  NodeId num_nodes() const { return static_cast<NodeId>(row_ptr_.size()) - 1; }
  std::span<const NodeId> neighbors(NodeId u) const {
    return {col_.data() + row_ptr_[static_cast<std::size_t>(u)],
            static_cast<std::size_t>(row_ptr_[static_cast<std::size_t>(u) + 1] - row_ptr_[static_cast<std::size_t>(u)])};
  }
  std::size_t edge_begin(NodeId u) const { return static_cast<std::size_t>(row_ptr_[static_cast<std::size_t>(u)]); }
  std::size_t num_directed_edges() const { return col_.size(); }
  /// Row-normalised operator S with m = S * E for GIN / SAGE / GCN.
  const SparseMatrix& op(Aggregator a) const;

 private:
  std::vector<std::int64_t> row_ptr_;
  NodeList col_;
  SparseMatrix sum_;
  SparseMatrix mean_;
  SparseMatrix sym_;
};

/// Message for a single node. N(u) empty gives the zero vector.
Vector aggregate(Aggregator kind, NodeId u, const Matrix& embeddings, const Graph& g,
                 const GnnLayer* gat_params = nullptr, bool gat_leaky = false);

/// Attention weights of u over N(u) in neighbor-list order.
Vector gat_attention(NodeId u, const Matrix& embeddings, const Graph& g, const GnnLayer& params,
                     bool gat_leaky = false);

/// Applies the updater to one node: rectified linear combination followed
/// by concatenation or interpolation with the node's own embedding.
Vector update(Updater kind, const Vector& self, const Vector& message, const GnnLayer& layer);

/// Row-stochastic class probabilities, one row per query node.
using PosteriorMatrix = Matrix;

PosteriorMatrix forward(const GnnModel& model, const Graph& g, std::span<const NodeId> query_nodes);
PosteriorMatrix forward(const GnnModel& model, const Graph& g);

/// Final-layer embeddings (pre-classifier) of every node.
Matrix embeddings(const GnnModel& model, const Graph& g);

struct LossGradient {
  double loss = 0.0;
  GnnModel gradient;  // same shapes as the model, loss_trace unused
};

/// Mean cross-entropy over `batch` (duplicates count twice) and its exact
/// gradient with respect to every parameter.
LossGradient gradient(const GnnModel& model, const Graph& g, std::span<const NodeId> batch);
LossGradient gradient(const GnnModel& model, const Graph& g, const MessageGraph& mg,
                      std::span<const NodeId> batch);

/// Full-batch gradient descent on every node of `g`. Deterministic in cfg.seed.
GnnModel train(const Graph& g, const GnnConfig& cfg);

/// Trains on `g` and returns the final pre-classifier embeddings.
Matrix node_embeddings(const Graph& g, const GnnConfig& cfg);

/// Row-wise argmax; ties go to the smallest class id.
LabelList argmax_rows(const Matrix& p);

inline constexpr const char* kModelFormat = "gerk-model-v1";
void save_model(const GnnModel& model, const std::filesystem::path& path);
GnnModel load_model(const std::filesystem::path& path);

// ---------------------------------------------------------------------------

template <typename Model, typename F>
void for_each_parameter(Model& model, F&& fn) {
  // fn(span, decayed): `decayed` marks blocks subject to weight decay.
  auto visit = [&](auto& block, bool decayed) {
    fn(std::span(block.data(), static_cast<std::size_t>(block.size())), decayed);
  };
  for (auto& layer : model.layers) {
    visit(layer.w_self, true);
    visit(layer.w_neigh, true);
    if (model.config.aggregator == Aggregator::kGat) {
      visit(layer.att_w, true);
      visit(layer.att_a, true);
    }
    if (model.config.updater == Updater::kInterpolation) {
      fn(std::span(&layer.alpha1, 1), false);
      fn(std::span(&layer.alpha2, 1), false);
    }
  }
  visit(model.classifier, true);
  visit(model.classifier_bias, false);
}

}  // namespace gerk
