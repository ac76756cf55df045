#pragma once

#include <algorithm>
#include <vector>

#include "gerk/eraser.hpp"

namespace gerk::test {

struct ScratchShard {
  Graph graph;
  GnnModel model;
};

// Shard i rebuilt from the original graph: its initial members minus every
// deleted node, minus every deleted edge, trained from scratch with the
// shard's own seed.
inline ScratchShard scratch_shard(const Graph& original, const NodeList& members,
                                  const std::vector<UnlearnRequest>& log, const GnnConfig& gnn,
                                  std::uint64_t seed) {
  NodeList keep;
  for (NodeId u : members) {
    const bool gone = std::any_of(log.begin(), log.end(), [&](const UnlearnRequest& r) {
      return r.kind == RequestKind::kNode && r.u == u;
    });
    if (!gone) keep.push_back(u);
  }
  Subgraph sub = induced_subgraph(original, keep);
  for (const auto& r : log) {
    if (r.kind != RequestKind::kEdge) continue;
    const NodeId a = sub.from_parent[static_cast<std::size_t>(r.u)];
    const NodeId b = sub.from_parent[static_cast<std::size_t>(r.v)];
    if (a >= 0 && b >= 0 && sub.graph.has_edge(a, b)) sub.graph = delete_edge(sub.graph, a, b);
  }
  ScratchShard out;
  out.graph = std::move(sub.graph);
  if (out.graph.num_nodes() > 0) {
    GnnConfig c = gnn;
    c.seed = seed;
    out.model = train(out.graph, c);
  }
  return out;
}

// Initial members of shard i in original ids.
inline NodeList initial_members(const Eraser& e, const NodeList& train_nodes, int i) {
  NodeList out;
  const auto& a = e.initial_assignment().assign;
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t] == i) out.push_back(train_nodes[t]);
  }
  return out;
}

}  // namespace gerk::test
