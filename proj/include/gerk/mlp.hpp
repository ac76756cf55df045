#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gerk/graph.hpp"
#include "gerk/types.hpp"

namespace gerk {

struct MlpConfig {
  int hidden_dim = 16;
  int epochs = 100;
  double learning_rate = 0.2;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  double grad_clip = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Feature-only classifier: three dense layers with ReLU between them.
struct MlpModel {
  std::vector<Matrix> weights;  // d_in x d_out per layer
  std::vector<Vector> biases;
  std::vector<double> loss_trace;
};

/// Trains on the features and labels of `nodes` only; edges are ignored.
MlpModel train_mlp(const Graph& g, std::span<const NodeId> nodes, const MlpConfig& cfg);

Matrix mlp_posteriors(const MlpModel& model, const Matrix& features);

/// Micro-F1 of the model on `nodes` of `g`.
double mlp_f1(const MlpModel& model, const Graph& g, std::span<const NodeId> nodes);

}  // namespace gerk
