#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "common/gradcheck.hpp"
#include "gerk/error.hpp"
#include "gerk/gnn.hpp"
#include "gerk/metrics.hpp"
#include "gerk/mlp.hpp"
#include "unit/helpers.hpp"

using namespace gerk;

namespace {

// u = 0 with neighbors 1 (E=[1,0], degree 1) and 2 (E=[0,2], degree 2).
Graph star_example() {
  Matrix e(4, 2);
  e << 9, 9, 1, 0, 0, 2, 5, 5;
  return make_graph(std::move(e), LabelList{0, 0, 0, 0}, 1, std::vector<Edge>{{0, 1}, {0, 2}, {2, 3}});
}

GnnConfig small_config(Aggregator a, Updater u, std::uint64_t seed = 1) {
  GnnConfig c;
  c.aggregator = a;
  c.updater = u;
  c.hidden_dim = 8;
  c.seed = seed;
  return c;
}

NodeList all_nodes(const Graph& g) {
  NodeList n(static_cast<std::size_t>(g.num_nodes()));
  std::iota(n.begin(), n.end(), 0);
  return n;
}

double accuracy(const GnnModel& m, const Graph& g) {
  return micro_f1(argmax_rows(forward(m, g)), g.labels);
}

}  // namespace

TEST_CASE("aggregate examples") {
  const Graph g = star_example();
  const Matrix& e = g.features;
  CHECK(aggregate(Aggregator::kGin, 0, e, g).isApprox(Vector{{1.0, 2.0}}));
  CHECK(aggregate(Aggregator::kSage, 0, e, g).isApprox(Vector{{0.5, 1.0}}));
  const Vector gcn = aggregate(Aggregator::kGcn, 0, e, g);
  CHECK(gcn(0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(gcn(1) == doctest::Approx(1.0).epsilon(1e-12));

  GnnLayer gat;
  gat.att_w = Matrix::Identity(2, 2);
  gat.att_a = Vector::Zero(4);
  CHECK(aggregate(Aggregator::kGat, 0, e, g, &gat).isApprox(Vector{{0.5, 1.0}}));
  CHECK_THROWS_AS(aggregate(Aggregator::kGat, 0, e, g), ConfigError);
  CHECK_THROWS_AS(aggregate(Aggregator::kGin, 0, Matrix::Zero(3, 2), g), ConfigError);
  CHECK_THROWS_AS(aggregate(Aggregator::kGin, 7, e, g), LookupError);
}

TEST_CASE("isolated node gets a zero message from every aggregator") {
  const Graph g = test::graph_from_edges(3, {{0, 1}});
  GnnLayer gat;
  gat.att_w = Matrix::Identity(2, 2);
  gat.att_a = Vector::Ones(4);
  for (Aggregator a : kAllAggregators) {
    CHECK(aggregate(a, 2, g.features, g, &gat).isZero(0.0));
  }
  for (Aggregator a : kAllAggregators) {
    for (Updater u : kAllUpdaters) {
      const Matrix p = forward(init_model(small_config(a, u), 2, 2), g);
      CHECK(p.allFinite());
      CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("update examples") {
  GnnLayer layer;
  layer.w_self = Matrix::Identity(2, 2);
  layer.w_neigh = Matrix::Zero(2, 2);
  const Vector self{{2.0, 3.0}};
  const Vector msg{{7.0, -1.0}};
  CHECK(update(Updater::kLinear, self, msg, layer) == self);

  GnnLayer one;
  one.w_self = Matrix::Zero(2, 1);
  one.w_neigh = Matrix::Zero(2, 1);
  one.w_neigh(0, 0) = 1.0 / 7.0;  // linear part = [1]
  CHECK(update(Updater::kConcat, self, msg, one) == Vector{{1.0, 2.0, 3.0}});

  layer.alpha1 = 1.0;
  layer.alpha2 = 0.0;
  layer.w_neigh(0, 1) = 1.0;  // lin = relu([2, 3 + 7]) = [2, 10]
  CHECK(update(Updater::kInterpolation, self, msg, layer) == update(Updater::kLinear, self, msg, layer));
  layer.alpha1 = 0.5;
  layer.alpha2 = 2.0;
  CHECK(update(Updater::kInterpolation, self, msg, layer).isApprox(Vector{{5.0, 11.0}}));

  CHECK_THROWS_AS(update(Updater::kLinear, Vector::Zero(3), msg, layer), ConfigError);
}

TEST_CASE("gat attention is a positive distribution over neighbors") {
  const Graph g = test::random_graph(30, 0.2, 2, 3, 5);
  for (bool leaky : {false, true}) {
    const GnnModel m = init_model(small_config(Aggregator::kGat, Updater::kLinear), 3, 2);
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
      const Vector a = gat_attention(u, g.features, g, m.layers[0], leaky);
      REQUIRE(a.size() == static_cast<Eigen::Index>(g.degree(u)));
      if (a.size() == 0) continue;
      CHECK(std::abs(a.sum() - 1.0) < 1e-12);
      CHECK(a.minCoeff() > 0.0);
    }
  }
}

TEST_CASE("zero classifier gives uniform posteriors") {
  const Graph g = test::random_graph(20, 0.2, 4, 3, 2);
  for (Aggregator a : kAllAggregators) {
    GnnModel m = init_model(small_config(a, Updater::kConcat), 3, 4);
    m.classifier.setZero();
    m.classifier_bias.setZero();
    const Matrix p = forward(m, g);
    CHECK((p.array() - 0.25).abs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("forward is permutation equivariant") {
  const Graph g = test::random_graph(25, 0.15, 3, 4, 9);
  std::vector<NodeId> perm = all_nodes(g);
  std::mt19937_64 rng(4);
  std::shuffle(perm.begin(), perm.end(), rng);  // old id u becomes perm[u]

  std::vector<Edge> edges;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    for (NodeId v : g.neighbors(u)) {
      if (u < v) edges.emplace_back(perm[static_cast<std::size_t>(u)], perm[static_cast<std::size_t>(v)]);
    }
  }
  Matrix x(g.num_nodes(), g.feature_dim());
  LabelList y(g.labels.size());
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    x.row(perm[static_cast<std::size_t>(u)]) = g.features.row(u);
    y[static_cast<std::size_t>(perm[static_cast<std::size_t>(u)])] = g.labels[static_cast<std::size_t>(u)];
  }
  const Graph h = make_graph(std::move(x), std::move(y), g.num_classes, edges);

  for (Aggregator a : kAllAggregators) {
    for (Updater u : kAllUpdaters) {
      const GnnModel m = init_model(small_config(a, u), 4, 3);
      const Matrix pg = forward(m, g);
      const Matrix ph = forward(m, h);
      for (NodeId v = 0; v < g.num_nodes(); ++v) {
        CHECK(pg.row(v).isApprox(ph.row(perm[static_cast<std::size_t>(v)]), 1e-12));
      }
    }
  }
}

TEST_CASE("two layers only see the two-hop ball") {
  const Graph path = test::path_graph(7);
  Graph far = path;
  far.features.row(3) *= -40.0;  // distance 3 from node 0
  Graph near = path;
  near.features.row(2) *= -40.0;  // distance 2
  for (Aggregator a : kAllAggregators) {
    for (Updater u : kAllUpdaters) {
      CAPTURE(to_string(a));
      CAPTURE(to_string(u));
      const GnnModel m = init_model(small_config(a, u, 3), 2, 2);
      const Matrix base = forward(m, path);
      CHECK(forward(m, far).row(0) == base.row(0));
      CHECK_FALSE(forward(m, near).row(0).isApprox(base.row(0), 1e-12));
    }
  }
}

TEST_CASE("forward on query nodes selects rows") {
  const Graph g = test::random_graph(15, 0.3, 3, 2, 1);
  const GnnModel m = init_model(small_config(Aggregator::kSage, Updater::kLinear), 2, 3);
  const Matrix all = forward(m, g);
  const NodeList q{4, 0, 4, 11};
  const Matrix sub = forward(m, g, q);
  for (std::size_t i = 0; i < q.size(); ++i) CHECK(sub.row(static_cast<Eigen::Index>(i)) == all.row(q[i]));
  CHECK_THROWS_AS(forward(m, g, NodeList{15}), LookupError);
  CHECK_THROWS_AS(forward(m, test::random_graph(5, 0.3, 3, 5, 1)), ConfigError);
}

TEST_CASE("analytic gradients match central differences") {
  const Graph g = test::gradcheck_graph();
  const NodeList batch = all_nodes(g);
  for (Aggregator a : kAllAggregators) {
    for (Updater u : kAllUpdaters) {
      for (std::uint64_t seed = 0; seed < 2; ++seed) {
        CAPTURE(to_string(a));
        CAPTURE(to_string(u));
        CAPTURE(seed);
        const auto r = test::check_gradient(test::gradcheck_model(a, u, seed), g, batch);
        CHECK(r.relative_error <= 1e-4);
        CHECK(r.kinks * 20 <= r.parameters);
      }
    }
  }
  for (Updater u : kAllUpdaters) {
    const auto r = test::check_gradient(test::gradcheck_model(Aggregator::kGat, u, 7, true), g, batch);
    CHECK(r.relative_error <= 1e-4);
  }
}

TEST_CASE("classifier bias gradient has a closed form") {
  const Graph g = test::gradcheck_graph();
  GnnModel m = test::gradcheck_model(Aggregator::kGcn, Updater::kConcat, 2);
  m.classifier.setZero();
  m.classifier_bias.setZero();
  // balanced labels: mean(p - onehot) = 1/3 - 1/3
  const auto full = gradient(m, g, all_nodes(g));
  CHECK(full.gradient.classifier_bias.cwiseAbs().maxCoeff() < 1e-15);
  CHECK(full.loss == doctest::Approx(std::log(3.0)));

  const NodeList batch{0, 3, 6, 1};  // labels 0, 0, 0, 1
  const auto part = gradient(m, g, batch);
  CHECK(part.gradient.classifier_bias(0) == doctest::Approx(1.0 / 3.0 - 0.75));
  CHECK(part.gradient.classifier_bias(1) == doctest::Approx(1.0 / 3.0 - 0.25));
  CHECK(part.gradient.classifier_bias(2) == doctest::Approx(1.0 / 3.0));
  const Matrix e = embeddings(m, g);
  Vector expect = Vector::Zero(e.cols());
  for (NodeId u : batch) expect += e.row(u).transpose() * ((g.labels[static_cast<std::size_t>(u)] == 0 ? 1.0 : 0.0) - 1.0 / 3.0);
  CHECK((part.gradient.classifier.col(0) + expect / 4.0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("duplicate batch entries count twice") {
  const Graph g = test::gradcheck_graph();
  const GnnModel m = test::gradcheck_model(Aggregator::kGat, Updater::kInterpolation, 3);
  const auto g0 = flatten_parameters(gradient(m, g, NodeList{2}).gradient);
  const auto g1 = flatten_parameters(gradient(m, g, NodeList{5}).gradient);
  const auto dup = gradient(m, g, NodeList{2, 5, 2});
  const auto gd = flatten_parameters(dup.gradient);
  for (std::size_t i = 0; i < gd.size(); ++i) CHECK(gd[i] == doctest::Approx((2 * g0[i] + g1[i]) / 3.0).epsilon(1e-9));
  CHECK(dup.loss == doctest::Approx((2 * gradient(m, g, NodeList{2}).loss + gradient(m, g, NodeList{5}).loss) / 3.0));
  CHECK_THROWS_AS(gradient(m, g, NodeList{}), ConfigError);
  CHECK_THROWS_AS(gradient(m, g, NodeList{12}), LookupError);
}

TEST_CASE("training separates a two-clique SBM") {
  SbmSpec spec;
  spec.blocks = {20, 20};
  spec.p_in = 1.0;
  spec.p_out = 0.0;
  spec.feature_dim = 4;
  spec.seed = 3;
  const Graph g = generate_sbm(spec);
  for (Aggregator a : kAllAggregators) {
    for (Updater u : kAllUpdaters) {
      CAPTURE(to_string(a));
      CAPTURE(to_string(u));
      const GnnModel m = train(g, small_config(a, u));
      CHECK(accuracy(m, g) >= 0.95);
      REQUIRE(m.loss_trace.size() == 100);
      CHECK(m.loss_trace.back() <= m.loss_trace.front());
    }
  }
}

TEST_CASE("training is deterministic in the seed") {
  const Graph g = test::random_graph(30, 0.2, 3, 3, 8);
  auto cfg = small_config(Aggregator::kGat, Updater::kInterpolation, 5);
  cfg.epochs = 20;
  const GnnModel a = train(g, cfg);
  const GnnModel b = train(g, cfg);
  CHECK(parameters_equal(a, b));
  CHECK(parameter_hash(a) == parameter_hash(b));
  CHECK(a.loss_trace == b.loss_trace);
  cfg.seed = 6;
  CHECK_FALSE(parameters_equal(a, train(g, cfg)));
  CHECK_THROWS_AS(train(Graph{}, cfg), ConfigError);
}

TEST_CASE("config validation") {
  GnnConfig c;
  CHECK_NOTHROW(c.validate());
  c.layers = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = GnnConfig{};
  c.hidden_dim = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = GnnConfig{};
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(parse_aggregator(to_string(Aggregator::kGcn)) == Aggregator::kGcn);
  CHECK(parse_updater(to_string(Updater::kConcat)) == Updater::kConcat);
  CHECK_THROWS_AS(parse_aggregator("gin2"), ConfigError);
}

TEST_CASE("parameter flattening round-trips") {
  GnnModel m = init_model(small_config(Aggregator::kGat, Updater::kInterpolation), 3, 2);
  std::vector<Scalar> p = flatten_parameters(m);
  CHECK(p.size() == parameter_count(m));
  for (auto& x : p) x += 1.0;
  GnnModel n = m;
  assign_parameters(n, p);
  CHECK(flatten_parameters(n) == p);
  CHECK(n.layers[0].alpha1 == doctest::Approx(1.5));
  CHECK_THROWS_AS(assign_parameters(n, std::span(p).first(3)), ConfigError);
}

TEST_CASE("embeddings of two identical-feature cliques separate") {
  // K4 and K6 with constant features: only structure tells them apart.
  std::vector<Edge> e;
  for (NodeId u = 0; u < 4; ++u) {
    for (NodeId v = u + 1; v < 4; ++v) e.emplace_back(u, v);
  }
  for (NodeId u = 4; u < 10; ++u) {
    for (NodeId v = u + 1; v < 10; ++v) e.emplace_back(u, v);
  }
  LabelList y(10, 1);
  std::fill(y.begin(), y.begin() + 4, 0);
  const Graph g = make_graph(Matrix::Ones(10, 3), y, 2, e);
  const auto cfg = small_config(Aggregator::kGin, Updater::kLinear);
  const Matrix emb = node_embeddings(g, cfg);
  CHECK(emb.rows() == 10);
  CHECK(emb.cols() == cfg.hidden_dim);
  CHECK(emb == node_embeddings(g, cfg));
  double within = 0, across = 0;
  int nw = 0, na = 0;
  for (NodeId u = 0; u < 10; ++u) {
    for (NodeId v = u + 1; v < 10; ++v) {
      const double d = (emb.row(u) - emb.row(v)).norm();
      if ((u < 4) == (v < 4)) {
        within += d;
        ++nw;
      } else {
        across += d;
        ++na;
      }
    }
  }
  CHECK(within / nw < across / na);
}

TEST_CASE("model save and load") {
  test::TempDir dir;
  auto cfg = small_config(Aggregator::kGat, Updater::kInterpolation);
  cfg.epochs = 5;
  const GnnModel m = train(test::random_graph(12, 0.3, 2, 3, 1), cfg);
  for (const char* name : {"m.json", "m.bin"}) {
    save_model(m, dir / name);
    const GnnModel r = load_model(dir / name);
    CHECK(parameters_equal(m, r));
    CHECK(r.loss_trace == m.loss_trace);
    CHECK(r.config.aggregator == Aggregator::kGat);
    CHECK(r.config.updater == Updater::kInterpolation);
  }
  test::write_text(dir / "bad.json", R"({"format":"something-else"})");
  CHECK_THROWS_AS(load_model(dir / "bad.json"), ConfigError);
}

TEST_CASE("argmax ties go to the smallest class") {
  Matrix p(3, 3);
  p << 0.2, 0.4, 0.4, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0.1, 0.1, 0.8;
  CHECK(argmax_rows(p) == LabelList{1, 0, 2});
}

TEST_CASE("micro and macro F1") {
  CHECK(micro_f1(LabelList{0, 1, 2}, LabelList{0, 1, 2}) == 1.0);
  CHECK(micro_f1(LabelList{0, 0, 1, 1}, LabelList{0, 1, 1, 1}) == doctest::Approx(0.75));
  // class 0: p=1/2 r=1 f=2/3; class 1: p=1 r=2/3 f=4/5
  CHECK(f1_score(LabelList{0, 0, 1, 1}, LabelList{0, 1, 1, 1}, F1Average::kMacro) ==
        doctest::Approx((2.0 / 3 + 0.8) / 2));
  CHECK_THROWS_AS(micro_f1(LabelList{}, LabelList{}), ConfigError);
  CHECK_THROWS_AS(micro_f1(LabelList{0}, LabelList{0, 1}), ConfigError);
}

TEST_CASE("mean_std and spearman") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(mean_std(v).mean == doctest::Approx(2.5));
  CHECK(mean_std(v).std == doctest::Approx(std::sqrt(1.25)));
  CHECK(spearman(v, std::vector<double>{10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman(v, std::vector<double>{4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(spearman(std::vector<double>{1, 2, 2, 3}, std::vector<double>{1, 2, 2, 3}) == doctest::Approx(1.0));
}

TEST_CASE("mlp ignores structure") {
  const Graph g = test::random_graph(60, 0.1, 3, 4, 2);
  MlpConfig cfg;
  cfg.epochs = 30;
  const NodeList nodes = all_nodes(g);
  const MlpModel a = train_mlp(g, nodes, cfg);
  Graph bare = g;
  for (auto& nb : bare.adj) nb.clear();
  const MlpModel b = train_mlp(bare, nodes, cfg);
  CHECK(a.weights.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a.weights[i] == b.weights[i]);
  CHECK(mlp_f1(a, g, nodes) == mlp_f1(b, bare, nodes));
  const Matrix p = mlp_posteriors(a, g.features);
  CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(a.loss_trace.back() <= a.loss_trace.front());
}

TEST_CASE("mlp matches the gnn when labels live only in features") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SbmSpec spec;
    spec.blocks = {100, 100, 100, 100};
    spec.p_in = spec.p_out = 0.02;
    spec.label_rule = SbmLabelRule::kUniform;
    spec.num_classes = 4;
    spec.feature_noise = 1.0;
    spec.seed = seed;
    const Graph g = generate_sbm(spec);
    const NodeSplit s = split_train_test(g, 0.8, seed);
    const MlpModel mlp = train_mlp(g, s.train_nodes, MlpConfig{});
    const GnnModel gnn = train(induced_subgraph(g, s.train_nodes).graph, GnnConfig{});
    const double gnn_f1 = micro_f1(argmax_rows(forward(gnn, g, s.test_nodes)), [&] {
      LabelList y;
      for (NodeId u : s.test_nodes) y.push_back(g.labels[static_cast<std::size_t>(u)]);
      return y;
    }());
    CAPTURE(seed);
    CHECK(std::abs(mlp_f1(mlp, g, s.test_nodes) - gnn_f1) < 0.05);
  }
}

TEST_CASE("mlp is near chance without feature signal") {
  SbmSpec spec;
  spec.blocks = {100, 100, 100, 100};
  spec.p_in = 0.1;
  spec.p_out = 0.01;
  spec.centroid_scale = 0.0;
  spec.seed = 1;
  const Graph g = generate_sbm(spec);
  const NodeSplit s = split_train_test(g, 0.8, 1);
  const double f1 = mlp_f1(train_mlp(g, s.train_nodes, MlpConfig{}), g, s.test_nodes);
  CHECK(std::abs(f1 - 0.25) < 0.1);
}
