#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "gerk/error.hpp"
#include "gerk/graph.hpp"
#include "unit/helpers.hpp"

using namespace gerk;
using gerk::test::TempDir;

namespace {

GraphLoadResult load_text(const TempDir& dir, const std::string& nodes, const std::string& edges) {
  test::write_text(dir / "nodes.csv", nodes);
  test::write_text(dir / "edges.txt", edges);
  return load_graph(dir / "nodes.csv", dir / "edges.txt");
}

const char* kThreeNodes = "id,label,f0,f1\n0,0,1.0,2.0\n1,1,3.0,4.0\n2,0,5.0,6.0\n";

// within-block and cross-block edge density of a block-structured graph
std::pair<double, double> block_densities(const Graph& g, const NodeList& block_of) {
  double in_edges = 0, out_edges = 0, in_pairs = 0, out_pairs = 0;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    for (NodeId v = u + 1; v < g.num_nodes(); ++v) {
      const bool same = block_of[u] == block_of[v];
      (same ? in_pairs : out_pairs) += 1;
      if (g.has_edge(u, v)) (same ? in_edges : out_edges) += 1;
    }
  }
  return {in_edges / in_pairs, out_edges / out_pairs};
}

}  // namespace

TEST_CASE("load_graph reads nodes and symmetrizes edges") {
  TempDir dir;
  const auto r = load_text(dir, kThreeNodes, "0 1\n1 2\n");
  const Graph& g = r.graph;
  CHECK(g.num_nodes() == 3);
  CHECK(g.num_classes == 2);
  CHECK(g.neighbors(1) == NodeList{0, 2});
  CHECK(g.neighbors(0) == NodeList{1});
  CHECK(g.features(2, 1) == 6.0);
  CHECK(g.labels == LabelList{0, 1, 0});
  CHECK_NOTHROW(validate(g));
}

TEST_CASE("load_graph drops self-loops and duplicate edges with a count") {
  TempDir dir;
  auto r = load_text(dir, kThreeNodes, "# comment\n0 0\n0 1\n1 0\n");
  CHECK(r.graph.neighbors(0) == NodeList{1});
  CHECK(r.graph.degree(0) == 1);
  CHECK(r.cleanup.self_loops == 1);
  CHECK(r.cleanup.duplicates == 1);
}

TEST_CASE("load_graph errors name the file and line") {
  TempDir dir;
  SUBCASE("malformed edge line") {
    try {
      load_text(dir, kThreeNodes, "0 1\n1 x\n");
      FAIL("expected an error");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("edges.txt:2") != std::string::npos);
    }
  }
  SUBCASE("edge to a missing node") { CHECK_THROWS_AS(load_text(dir, kThreeNodes, "0 7\n"), ConfigError); }
  SUBCASE("negative label") {
    CHECK_THROWS_AS(load_text(dir, "id,label,f0\n0,-1,1.0\n", ""), ConfigError);
  }
  SUBCASE("non-contiguous ids") {
    CHECK_THROWS_AS(load_text(dir, "id,label,f0\n0,0,1.0\n2,0,1.0\n", ""), ConfigError);
  }
  SUBCASE("wrong column count") {
    try {
      load_text(dir, "id,label,f0\n0,0\n", "");
      FAIL("expected an error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("nodes.csv:2") != std::string::npos);
    }
  }
}

TEST_CASE("graph files and snapshots round-trip") {
  TempDir dir;
  const Graph g = test::random_graph(30, 0.2, 3, 4, 5);
  write_graph_files(g, dir / "n.csv", dir / "e.txt");
  const Graph back = load_graph(dir / "n.csv", dir / "e.txt").graph;
  CHECK(back.adj == g.adj);
  CHECK(back.labels == g.labels);
  CHECK(back.features.isApprox(g.features, 1e-12));

  for (const char* name : {"g.bin", "g.json"}) {
    save_graph(g, dir / name);
    CHECK(load_graph_snapshot(dir / name) == g);
  }
  CHECK(content_hash(load_graph_snapshot(dir / "g.bin")) == content_hash(g));
  test::write_text(dir / "bad.json", "{\"format\": \"other\"}");
  CHECK_THROWS_AS(load_graph_snapshot(dir / "bad.json"), ConfigError);
}

TEST_CASE("validate rejects broken graphs") {
  Graph g = test::path_graph(3);
  CHECK_NOTHROW(validate(g));
  SUBCASE("asymmetric") {
    g.adj[0].clear();
    CHECK_THROWS_AS(validate(g), InvariantError);
  }
  SUBCASE("self-loop") {
    g.adj[0] = {0, 1};
    CHECK_THROWS_AS(validate(g), InvariantError);
  }
  SUBCASE("label out of range") {
    g.labels[0] = 5;
    CHECK_THROWS_AS(validate(g), InvariantError);
  }
  SUBCASE("feature height") {
    g.features = Matrix::Zero(2, 2);
    CHECK_THROWS_AS(validate(g), InvariantError);
  }
}

TEST_CASE("split_train_test sizes and determinism") {
  const Graph g10 = test::path_graph(10);
  const NodeSplit s = split_train_test(g10, 0.8, 3);
  CHECK(s.train_nodes.size() == 8);
  CHECK(s.test_nodes.size() == 2);
  NodeList all = s.train_nodes;
  all.insert(all.end(), s.test_nodes.begin(), s.test_nodes.end());
  std::sort(all.begin(), all.end());
  NodeList expect(10);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(all == expect);

  const NodeSplit again = split_train_test(g10, 0.8, 3);
  CHECK(again.train_nodes == s.train_nodes);
  bool differs = false;
  for (std::uint64_t seed = 4; seed < 10 && !differs; ++seed) {
    differs = split_train_test(g10, 0.8, seed).train_nodes != s.train_nodes;
  }
  CHECK(differs);

  CHECK_THROWS_AS(split_train_test(g10, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(split_train_test(g10, 1.0, 1), ConfigError);
}

TEST_CASE("split_train_test selects nodes uniformly") {
  SbmSpec spec;
  spec.blocks = {500, 500};
  spec.p_in = 0.01;
  spec.p_out = 0.001;
  const Graph g = generate_sbm(spec);
  std::vector<int> hits(1000, 0);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const NodeSplit s = split_train_test(g, 0.8, seed);
    REQUIRE(s.train_nodes.size() == 800);
    for (NodeId u : s.train_nodes) ++hits[u];
  }
  // Binomial(100, 0.8): a node outside 0.8 +- 0.05 is ~1.2 sigma out, so
  // check the average and the bulk rather than every node.
  const double mean = std::accumulate(hits.begin(), hits.end(), 0.0) / (100.0 * 1000.0);
  CHECK(mean == doctest::Approx(0.8).epsilon(1e-12));
  int inside = 0;
  for (int h : hits) inside += std::abs(h / 100.0 - 0.8) <= 0.05 + 1e-12;
  CHECK(inside >= 700);
  CHECK(*std::min_element(hits.begin(), hits.end()) >= 60);
  CHECK(*std::max_element(hits.begin(), hits.end()) <= 97);
}

TEST_CASE("stratified split rounds per class") {
  Matrix x = Matrix::Zero(20, 1);
  LabelList y(20);
  for (int i = 0; i < 20; ++i) y[i] = i < 10 ? 0 : 1;
  const Graph g = make_graph(x, y, 2, {});
  const NodeSplit s = split_train_test(g, 0.8, 1, true);
  int zeros = 0;
  for (NodeId u : s.train_nodes) zeros += g.labels[u] == 0;
  CHECK(zeros == 8);
  CHECK(s.train_nodes.size() == 16);
}

TEST_CASE("induced_subgraph examples") {
  const Graph path = test::path_graph(3);
  const NodeList ends{0, 2};
  const Subgraph s = induced_subgraph(path, ends);
  CHECK(s.graph.num_nodes() == 2);
  CHECK(s.graph.num_edges() == 0);
  CHECK(s.to_parent == NodeList{0, 2});
  CHECK(s.from_parent == NodeList{0, -1, 1});
  CHECK(s.graph.features.row(1) == path.features.row(2));

  const Graph tri = test::complete_graph(3);
  const NodeList two{0, 1};
  CHECK(induced_subgraph(tri, two).graph.num_edges() == 1);

  const NodeList all{0, 1, 2};
  CHECK(induced_subgraph(tri, all).graph == tri);

  const NodeList bad{0, 9};
  CHECK_THROWS_AS(induced_subgraph(tri, bad), LookupError);
}

TEST_CASE("induced_subgraph is idempotent and delete_node matches it") {
  const Graph g = test::random_graph(40, 0.15, 3, 3, 11);
  NodeList keep;
  for (NodeId u = 0; u < 40; u += 3) keep.push_back(u);
  const Subgraph once = induced_subgraph(g, keep);
  NodeList local(once.graph.num_nodes());
  std::iota(local.begin(), local.end(), 0);
  CHECK(induced_subgraph(once.graph, local).graph == once.graph);

  for (NodeId u : {0, 17, 39}) {
    NodeList rest;
    for (NodeId v = 0; v < 40; ++v) {
      if (v != u) rest.push_back(v);
    }
    const Subgraph del = delete_node(g, u);
    const Subgraph ind = induced_subgraph(g, rest);
    CHECK(del.graph == ind.graph);
    CHECK(del.to_parent == ind.to_parent);
    CHECK_NOTHROW(validate(del.graph));
  }
}

TEST_CASE("delete_node examples") {
  const Graph star = test::graph_from_edges(4, {{0, 1}, {0, 2}, {0, 3}});
  const Subgraph s = delete_node(star, 0);
  CHECK(s.graph.num_nodes() == 3);
  CHECK(s.graph.num_edges() == 0);

  const Graph iso = test::graph_from_edges(3, {{0, 1}});
  CHECK(delete_node(iso, 2).graph.num_edges() == 1);

  const Subgraph t = delete_node(test::complete_graph(3), 1);
  CHECK(t.graph.num_edges() == 1);
  CHECK(t.to_parent == NodeList{0, 2});
  CHECK_THROWS_AS(delete_node(star, 4), LookupError);
}

TEST_CASE("delete_edge examples") {
  const Graph path = test::path_graph(3);
  const Graph g = delete_edge(path, 0, 1);
  CHECK(g.neighbors(1) == NodeList{2});
  CHECK(g.neighbors(0).empty());
  CHECK(g.features == path.features);
  CHECK_THROWS_AS(delete_edge(g, 0, 1), LookupError);
  CHECK_THROWS_AS(delete_edge(g, 1, 0), LookupError);

  const Graph k4 = delete_edge(test::complete_graph(4), 0, 1);
  std::vector<std::size_t> deg;
  for (NodeId u = 0; u < 4; ++u) deg.push_back(k4.degree(u));
  CHECK(deg == std::vector<std::size_t>{2, 2, 3, 3});
}

TEST_CASE("generate_sbm degenerate probabilities give disjoint cliques") {
  SbmSpec spec;
  spec.blocks = {50, 50};
  spec.p_in = 1.0;
  spec.p_out = 0.0;
  const Graph g = generate_sbm(spec);
  CHECK(g.num_edges() == 2 * 50 * 49 / 2);
  for (NodeId u = 0; u < 100; ++u) {
    CHECK(g.degree(u) == 49);
    for (NodeId v : g.neighbors(u)) CHECK(v / 50 == u / 50);
    CHECK(g.labels[u] == u / 50);
  }
}

TEST_CASE("generate_sbm is deterministic and validated") {
  SbmSpec spec;
  spec.blocks = {30, 30};
  spec.p_in = 0.2;
  spec.p_out = 0.05;
  spec.seed = 9;
  CHECK(generate_sbm(spec) == generate_sbm(spec));
  spec.seed = 10;
  const Graph other = generate_sbm(spec);
  spec.seed = 9;
  CHECK_FALSE(other == generate_sbm(spec));

  SbmSpec bad = spec;
  bad.p_out = 0.5;
  CHECK_THROWS_AS(generate_sbm(bad), ConfigError);
  bad = spec;
  bad.blocks = {10, 0};
  CHECK_THROWS_AS(generate_sbm(bad), ConfigError);
  bad = spec;
  bad.sub_blocks = 2;
  bad.p_mix = 0.5;
  CHECK_THROWS_AS(generate_sbm(bad), ConfigError);
}

TEST_CASE("generate_sbm with p_in = p_out has uniform density") {
  SbmSpec spec;
  spec.blocks = {40, 40, 40};
  spec.p_in = 0.1;
  spec.p_out = 0.1;
  NodeList block_of;
  for (int b = 0; b < 3; ++b) block_of.insert(block_of.end(), 40, b);
  double in = 0, out = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    spec.seed = seed;
    const auto [din, dout] = block_densities(generate_sbm(spec), block_of);
    in += din;
    out += dout;
  }
  CHECK(in / out == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("generate_sbm expected degrees") {
  SbmSpec spec;
  spec.blocks = {250, 250, 250, 250};
  spec.p_in = 0.05;
  spec.p_out = 0.002;
  double within = 0, cross = 0;
  const int seeds = 5;
  for (int seed = 0; seed < seeds; ++seed) {
    spec.seed = static_cast<std::uint64_t>(seed);
    const Graph g = generate_sbm(spec);
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
      for (NodeId v : g.neighbors(u)) (u / 250 == v / 250 ? within : cross) += 1;
    }
  }
  within /= 1000.0 * seeds;
  cross /= 1000.0 * seeds;
  CHECK(within == doctest::Approx(249 * 0.05).epsilon(0.03));
  CHECK(cross == doctest::Approx(750 * 0.002).epsilon(0.1));
}

TEST_CASE("generate_sbm uniform labels ignore blocks") {
  SbmSpec spec;
  spec.blocks = {200, 200};
  spec.p_in = 0.05;
  spec.p_out = 0.01;
  spec.label_rule = SbmLabelRule::kUniform;
  spec.num_classes = 3;
  const Graph g = generate_sbm(spec);
  CHECK(g.num_classes == 3);
  std::set<Label> in_block0(g.labels.begin(), g.labels.begin() + 200);
  CHECK(in_block0.size() == 3);
}

TEST_CASE("generate_sbm sub-blocks") {
  SbmSpec spec;
  spec.blocks = {40, 40};
  spec.sub_blocks = 4;
  spec.p_in = 1.0;
  spec.p_mix = 0.0;
  spec.p_out = 0.0;
  const Graph g = generate_sbm(spec);
  // four cliques of ten per block
  for (NodeId u = 0; u < 80; ++u) {
    CHECK(g.degree(u) == 9);
    for (NodeId v : g.neighbors(u)) CHECK(v / 10 == u / 10);
  }
  CHECK(g.labels[35] == 0);
  CHECK(g.labels[45] == 1);

  spec.sub_blocks = 1;
  spec.p_in = 0.3;
  spec.p_out = 0.01;
  SbmSpec same = spec;
  same.p_mix = 0.2;  // unused without sub-blocks
  CHECK(generate_sbm(spec) == generate_sbm(same));
}

TEST_CASE("content_hash tracks every part of the graph") {
  const Graph g = test::random_graph(20, 0.2, 2, 3, 1);
  Graph h = g;
  CHECK(content_hash(g) == content_hash(h));
  h.features(3, 1) += 1e-9;
  CHECK(content_hash(g) != content_hash(h));
  h = g;
  h.labels[0] = 1 - h.labels[0];
  CHECK(content_hash(g) != content_hash(h));
  CHECK(content_hash(delete_edge(g, g.adj[0].empty() ? 1 : 0, g.adj[0].empty() ? g.adj[1][0] : g.adj[0][0])) !=
        content_hash(g));
}
