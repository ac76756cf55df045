#include "gerk/mlp.hpp"

#include <cmath>
#include <random>

#include "gerk/error.hpp"
#include "gerk/gnn.hpp"
#include "gerk/metrics.hpp"

namespace gerk {

void MlpConfig::validate() const {
  if (hidden_dim < 1) throw ConfigError("mlp hidden_dim must be >= 1");
  if (epochs < 1) throw ConfigError("mlp epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("mlp learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("mlp momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("mlp weight_decay must be >= 0");
  if (!(grad_clip >= 0.0)) throw ConfigError("mlp grad_clip must be >= 0");
}

namespace {

Matrix softmax_rows(Matrix logits) {
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    logits.row(r).array() -= logits.row(r).maxCoeff();
    logits.row(r) = logits.row(r).array().exp().matrix();
    logits.row(r) /= logits.row(r).sum();
  }
  return logits;
}

struct Activations {
  std::vector<Matrix> inputs;  // input of each layer
  std::vector<Matrix> pre;     // pre-activation of each layer
};

Matrix run(const MlpModel& m, const Matrix& x, Activations* acts) {
  Matrix h = x;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    Matrix pre = (h * m.weights[l]).rowwise() + m.biases[l].transpose();
    if (acts) {
      acts->inputs.push_back(h);
      acts->pre.push_back(pre);
    }
    h = l + 1 < m.weights.size() ? Matrix(pre.cwiseMax(0.0)) : pre;
  }
  return h;
}

}  // namespace

MlpModel train_mlp(const Graph& g, std::span<const NodeId> nodes, const MlpConfig& cfg) {
  cfg.validate();
  if (nodes.empty()) throw ConfigError("cannot train an MLP on zero nodes");
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Matrix x(n, g.feature_dim());
  Matrix onehot = Matrix::Zero(n, g.num_classes);
  for (Eigen::Index i = 0; i < n; ++i) {
    const NodeId u = nodes[static_cast<std::size_t>(i)];
    x.row(i) = g.features.row(u);
    onehot(i, g.labels[static_cast<std::size_t>(u)]) = 1.0;
  }

  std::mt19937_64 rng(cfg.seed);
  MlpModel model;
  const Eigen::Index widths[] = {g.feature_dim(), cfg.hidden_dim, cfg.hidden_dim, g.num_classes};
  for (int l = 0; l < 3; ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(widths[l] + widths[l + 1]));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix w(widths[l], widths[l + 1]);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
    model.weights.push_back(std::move(w));
    model.biases.push_back(Vector::Zero(widths[l + 1]));
  }

  std::vector<Matrix> vel_w;
  std::vector<Vector> vel_b;
  for (int l = 0; l < 3; ++l) {
    vel_w.push_back(Matrix::Zero(model.weights[l].rows(), model.weights[l].cols()));
    vel_b.push_back(Vector::Zero(model.biases[l].size()));
  }

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Activations acts;
    const Matrix p = softmax_rows(run(model, x, &acts));
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) loss -= std::log(std::max((p.row(i).array() * onehot.row(i).array()).sum(), 1e-300));
    model.loss_trace.push_back(loss / static_cast<double>(n));

    std::vector<Matrix> gw(3);
    std::vector<Vector> gb(3);
    Matrix delta = (p - onehot) / static_cast<double>(n);
    for (int l = 2; l >= 0; --l) {
      gw[l] = acts.inputs[l].transpose() * delta;
      gb[l] = delta.colwise().sum().transpose();
      if (l > 0) {
        delta = (delta * model.weights[l].transpose()).cwiseProduct(
            Matrix((acts.pre[l - 1].array() > 0.0).cast<double>()));
      }
    }
    double norm_sq = 0.0;
    for (int l = 0; l < 3; ++l) norm_sq += gw[l].squaredNorm() + gb[l].squaredNorm();
    const double norm = std::sqrt(norm_sq);
    const double scale = cfg.grad_clip > 0.0 && norm > cfg.grad_clip ? cfg.grad_clip / norm : 1.0;
    for (int l = 0; l < 3; ++l) {
      vel_w[l] = cfg.momentum * vel_w[l] + scale * gw[l];
      vel_b[l] = cfg.momentum * vel_b[l] + scale * gb[l];
      model.weights[l] *= 1.0 - cfg.learning_rate * cfg.weight_decay;
      model.weights[l] -= cfg.learning_rate * vel_w[l];
      model.biases[l] -= cfg.learning_rate * vel_b[l];
    }
  }
  return model;
}

Matrix mlp_posteriors(const MlpModel& model, const Matrix& features) {
  if (model.weights.empty() || features.cols() != model.weights.front().rows()) {
    throw ConfigError("feature width does not match the MLP input");
  }
  return softmax_rows(run(model, features, nullptr));
}

double mlp_f1(const MlpModel& model, const Graph& g, std::span<const NodeId> nodes) {
  Matrix x(static_cast<Eigen::Index>(nodes.size()), g.feature_dim());
  LabelList truth;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = g.features.row(nodes[i]);
    truth.push_back(g.labels[static_cast<std::size_t>(nodes[i])]);
  }
  return micro_f1(argmax_rows(mlp_posteriors(model, x)), truth);
}

}  // namespace gerk
