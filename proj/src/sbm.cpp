#include <random>
#include <string>

#include "gerk/error.hpp"
#include "gerk/graph.hpp"

namespace gerk {

std::string to_string(SbmLabelRule r) {
  return r == SbmLabelRule::kBlock ? "block" : "uniform";
}

SbmLabelRule parse_sbm_label_rule(const std::string& s) {
  if (s == "block" || s == "blocks") return SbmLabelRule::kBlock;
  if (s == "uniform" || s == "random") return SbmLabelRule::kUniform;
  throw ConfigError("unknown SBM label rule '" + s + "' (block, uniform)");
}

void validate(const SbmSpec& spec) {
  if (spec.blocks.empty()) throw ConfigError("SBM needs at least one block");
  if (spec.sub_blocks < 1) throw ConfigError("SBM sub_blocks must be >= 1");
  for (NodeId size : spec.blocks) {
    if (size < spec.sub_blocks) throw ConfigError("SBM blocks need at least sub_blocks nodes");
  }
  if (!(0.0 <= spec.p_out && spec.p_out <= spec.p_in && spec.p_in <= 1.0)) {
    throw ConfigError("SBM probabilities must satisfy 0 <= p_out <= p_in <= 1");
  }
  if (spec.sub_blocks > 1 && !(spec.p_out <= spec.p_mix && spec.p_mix <= spec.p_in)) {
    throw ConfigError("SBM with sub_blocks needs p_out <= p_mix <= p_in");
  }
  if (spec.feature_dim < 1) throw ConfigError("SBM feature_dim must be >= 1");
  if (spec.feature_noise < 0.0) throw ConfigError("SBM feature_noise must be >= 0");
  if (spec.num_classes < 0) throw ConfigError("SBM num_classes must be >= 0");
}

Graph generate_sbm(const SbmSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  NodeList block_of, community_of;
  for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
    const NodeId size = spec.blocks[b];
    for (NodeId i = 0; i < size; ++i) {
      block_of.push_back(static_cast<NodeId>(b));
      community_of.push_back(static_cast<NodeId>(b) * spec.sub_blocks +
                             static_cast<NodeId>(std::int64_t{i} * spec.sub_blocks / size));
    }
  }
  const auto n = static_cast<NodeId>(block_of.size());
  const int num_blocks = static_cast<int>(spec.blocks.size());
  const bool by_block = spec.label_rule == SbmLabelRule::kBlock;
  const int num_classes = by_block ? num_blocks : (spec.num_classes > 0 ? spec.num_classes : num_blocks);

  Matrix centroids(num_classes, spec.feature_dim);
  for (Eigen::Index i = 0; i < centroids.size(); ++i) {
    centroids.data()[i] = spec.centroid_scale * gauss(rng);
  }

  LabelList labels(static_cast<std::size_t>(n));
  std::uniform_int_distribution<int> pick_class(0, num_classes - 1);
  for (NodeId u = 0; u < n; ++u) {
    labels[static_cast<std::size_t>(u)] = by_block ? block_of[static_cast<std::size_t>(u)] : pick_class(rng);
  }

  Matrix features(n, spec.feature_dim);
  for (NodeId u = 0; u < n; ++u) {
    for (int j = 0; j < spec.feature_dim; ++j) {
      features(u, j) = centroids(labels[static_cast<std::size_t>(u)], j) + spec.feature_noise * gauss(rng);
    }
  }
  if (spec.sub_blocks > 1 && spec.sub_block_feature_scale != 0.0) {
    Matrix offsets(num_blocks * spec.sub_blocks, spec.feature_dim);
    for (Eigen::Index i = 0; i < offsets.size(); ++i) offsets.data()[i] = spec.sub_block_feature_scale * gauss(rng);
    for (NodeId u = 0; u < n; ++u) features.row(u) += offsets.row(community_of[static_cast<std::size_t>(u)]);
  }

  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    const auto su = static_cast<std::size_t>(u);
    for (NodeId v = u + 1; v < n; ++v) {
      const auto sv = static_cast<std::size_t>(v);
      double p = spec.p_out;
      if (community_of[su] == community_of[sv]) {
        p = spec.p_in;
      } else if (block_of[su] == block_of[sv]) {
        p = spec.sub_blocks > 1 ? spec.p_mix : spec.p_in;
      }
      if (p > 0.0 && unit(rng) < p) edges.emplace_back(u, v);
    }
  }
  return make_graph(std::move(features), std::move(labels), num_classes, edges);
}

}  // namespace gerk
