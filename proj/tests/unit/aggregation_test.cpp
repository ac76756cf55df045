#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "common/posteriors.hpp"
#include "gerk/aggregation.hpp"
#include "gerk/error.hpp"
#include "unit/helpers.hpp"

using namespace gerk;

namespace {

Matrix rows2(std::initializer_list<std::initializer_list<double>> r) {
  Matrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

LabelList argmax_all(const Matrix& p) { return argmax_rows(p); }

Vector softmax(const Vector& x) {
  const Vector e = (x.array() - x.maxCoeff()).exp();
  return e / e.sum();
}

}  // namespace

TEST_CASE("mean_aggr examples") {
  const ShardPosteriors sp{rows2({{0.6, 0.4}}), rows2({{0.2, 0.8}})};
  CHECK(mean_aggr(sp).isApprox(rows2({{0.4, 0.6}})));
  std::mt19937_64 rng(1);
  const ShardPosteriors one = test::random_posteriors(1, 6, 3, rng);
  const ShardPosteriors same{one[0], one[0], one[0]};
  CHECK(mean_aggr(same).isApprox(one[0], 1e-15));
  for (int t = 0; t < 50; ++t) {
    const auto r = test::random_posteriors(4, 5, 4, rng);
    CHECK((mean_aggr(r).rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK_NOTHROW(validate(r));
  }
  CHECK_THROWS_AS(mean_aggr({}), ConfigError);
  CHECK_THROWS_AS(mean_aggr({rows2({{1.0, 0.0}}), rows2({{1.0, 0.0, 0.0}})}), ConfigError);
}

TEST_CASE("validate rejects bad posterior sets") {
  CHECK_THROWS_AS(validate(ShardPosteriors{}), InvariantError);
  CHECK_THROWS_AS(validate({rows2({{0.5, 0.4}})}), InvariantError);
  CHECK_THROWS_AS(validate({rows2({{0.5, 0.5}}), rows2({{0.5, 0.5}, {0.5, 0.5}})}), InvariantError);
}

TEST_CASE("maj_aggr examples") {
  const Matrix a = rows2({{0.9, 0.1}});
  const Matrix b = rows2({{0.1, 0.9}});
  CHECK(maj_aggr({a, a, b}) == LabelList{0});
  CHECK(maj_aggr({b, b, a}) == LabelList{1});
  CHECK(maj_aggr({a, b}) == LabelList{0});
  CHECK(maj_aggr({b, a}) == LabelList{0});
  // a shard with a tie inside its own row votes for the smaller class
  CHECK(maj_aggr({rows2({{0.4, 0.4, 0.2}}), rows2({{0.1, 0.2, 0.7}}), rows2({{0.5, 0.5, 0.0}})}) == LabelList{0});
}

TEST_CASE("maj_aggr equals brute-force vote counting") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 100; ++t) {
    const auto sp = test::random_posteriors(5, 4, 7, rng);
    CHECK(maj_aggr(sp) == test::brute_force_vote(sp));
  }
}

TEST_CASE("weighted_predict examples") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto sp = test::random_posteriors(4, 6, 3, rng);
    const Vector uniform = Vector::Constant(4, 0.25);
    CHECK(weighted_predict(sp, uniform) == argmax_all(mean_aggr(sp)));
    for (int j = 0; j < 4; ++j) {
      CHECK(weighted_predict(sp, Vector::Unit(4, j)) == argmax_all(sp[static_cast<std::size_t>(j)]));
    }
    Vector alpha = Vector::Random(4).cwiseAbs();
    alpha /= alpha.sum();
    CHECK(weighted_predict(sp, alpha) == weighted_predict(sp, 8.0 * alpha));
  }
  CHECK_THROWS_AS(weighted_predict(test::random_posteriors(3, 2, 2, rng), Vector::Ones(2)), ConfigError);
}

TEST_CASE("shard permutation leaves predictions unchanged") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const auto sp = test::random_posteriors(5, 8, 4, rng);
    Vector alpha = Vector::Random(5).cwiseAbs();
    alpha /= alpha.sum();
    std::vector<int> perm(5);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    ShardPosteriors sq;
    Vector beta(5);
    for (int i = 0; i < 5; ++i) {
      sq.push_back(sp[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
      beta(i) = alpha(perm[static_cast<std::size_t>(i)]);
    }
    CHECK(maj_aggr(sq) == maj_aggr(sp));
    // summation order differs, so sums agree only to rounding
    const Matrix wa = weighted_sum(sp, alpha);
    const Matrix wb = weighted_sum(sq, beta);
    CHECK(wa.isApprox(wb, 1e-12));
  }
}

TEST_CASE("aggregation mode names") {
  for (auto m : {AggregationMode::kMean, AggregationMode::kMajority, AggregationMode::kOptimal}) {
    CHECK(parse_aggregation_mode(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_aggregation_mode("median"), ConfigError);
}

TEST_CASE("score training starts from uniform and keeps alpha on the simplex") {
  std::mt19937_64 rng(5);
  const auto sp = test::random_posteriors(4, 30, 3, rng);
  LabelList y(30);
  for (auto& l : y) l = static_cast<Label>(rng() % 3);
  OptAggrConfig cfg;
  cfg.epochs = 40;
  int calls = 0;
  const auto s = fit_importance_scores(sp, y, cfg, [&](int epoch, const Vector& alpha) {
    CHECK(epoch == calls++);
    CHECK(alpha.minCoeff() >= 0.0);
    CHECK(std::abs(alpha.sum() - 1.0) <= 1e-6);
  });
  CHECK(calls == 40);
  CHECK(s.epochs_run == 40);
  CHECK(s.loss_trace.size() == 41);
  CHECK(s.loss_trace.front() == doctest::Approx(aggregation_loss(sp, y, Vector::Constant(4, 0.25))));
  CHECK_NOTHROW(validate(s, 4));
  CHECK(s.pre_scores.minCoeff() >= 0.0);
}

TEST_CASE("first score step follows the numerical gradient") {
  std::mt19937_64 rng(9);
  const auto sp = test::random_posteriors(3, 25, 4, rng);
  LabelList y(25);
  for (auto& l : y) l = static_cast<Label>(rng() % 4);
  OptAggrConfig cfg;
  cfg.epochs = 1;
  cfg.lambda = 0.0;
  cfg.clamp = false;
  cfg.learning_rate = 0.5;
  const auto s = fit_importance_scores(sp, y, cfg);
  const double h = 1e-5;
  for (Eigen::Index j = 0; j < 3; ++j) {
    Vector up = Vector::Zero(3), down = Vector::Zero(3);
    up(j) = h;
    down(j) = -h;
    const double g = (aggregation_loss(sp, y, softmax(up)) - aggregation_loss(sp, y, softmax(down))) / (2 * h);
    CHECK(s.pre_scores(j) == doctest::Approx(-cfg.learning_rate * g).epsilon(1e-6));
  }
}

TEST_CASE("planted oracle shard gets the largest score") {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = test::planted_oracle(3, 40, 3, seed);
    const auto s = fit_importance_scores(inst.posteriors, inst.labels, OptAggrConfig{});
    wins += s.alpha(0) > s.alpha(1) && s.alpha(0) > s.alpha(2);
  }
  CHECK(wins >= 9);
}

TEST_CASE("score loss decreases on a tiny instance") {
  std::mt19937_64 rng(2024);
  const auto sp = test::random_posteriors(2, 20, 3, rng);
  LabelList y(20);
  for (auto& l : y) l = static_cast<Label>(rng() % 3);
  OptAggrConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.epochs = 200;
  const auto s = fit_importance_scores(sp, y, cfg);
  CHECK(s.loss_trace.back() <= s.loss_trace.front());
  CHECK(fit_importance_scores(sp, y, cfg).alpha == s.alpha);
}

TEST_CASE("fully clamped scores fall back to uniform") {
  // Identical shards give no loss gradient. The regulariser pushes every
  // pre-score below zero and the clamp sets it back to zero.
  const Matrix wrong = rows2({{0.1, 0.9}, {0.1, 0.9}});
  const ShardPosteriors sp{wrong, wrong};
  OptAggrConfig cfg;
  cfg.lambda = 0.5;
  cfg.epochs = 3;
  const auto s = fit_importance_scores(sp, LabelList{0, 0}, cfg);
  CHECK(s.alpha.isApprox(Vector::Constant(2, 0.5)));
}

TEST_CASE("score node sampling") {
  NodeList train(200);
  std::iota(train.begin(), train.end(), 0);
  const NodeList a = sample_score_nodes(train, 0.1, 3);
  CHECK(a.size() == 20);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
  CHECK(a == sample_score_nodes(train, 0.1, 3));
  CHECK(a != sample_score_nodes(train, 0.1, 4));
  CHECK(sample_score_nodes(train, 0.001, 3).size() == 1);
  CHECK(sample_score_nodes(train, 1.0, 3) == train);
}

TEST_CASE("opt aggr config validation") {
  OptAggrConfig c;
  CHECK_NOTHROW(c.validate());
  c.subset_frac = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = OptAggrConfig{};
  c.lambda = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = OptAggrConfig{};
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("opt_aggr_train on real shard models") {
  const Graph g = test::random_graph(40, 0.15, 2, 3, 6);
  GnnConfig gc;
  gc.epochs = 10;
  std::vector<GnnModel> models;
  for (std::uint64_t s = 0; s < 3; ++s) {
    gc.seed = s;
    models.push_back(train(g, gc));
  }
  NodeList train_nodes(40);
  std::iota(train_nodes.begin(), train_nodes.end(), 0);
  OptAggrConfig cfg;
  cfg.subset_frac = 0.25;
  const auto s = opt_aggr_train(models, g, train_nodes, cfg);
  CHECK(s.score_train_nodes == sample_score_nodes(train_nodes, 0.25, cfg.seed));
  CHECK(s.subset_frac == 0.25);
  CHECK_NOTHROW(validate(s, 3));
  for (NodeId u : s.score_train_nodes) CHECK(s.contains(u));
  CHECK_THROWS_AS(opt_aggr_train(std::span<const GnnModel>{}, g, train_nodes, cfg), ConfigError);
}

TEST_CASE("scores save and load") {
  test::TempDir dir;
  const auto inst = test::planted_oracle(3, 10, 2, 1);
  OptAggrConfig cfg;
  cfg.epochs = 5;
  ImportanceScores s = fit_importance_scores(inst.posteriors, inst.labels, cfg);
  s.score_train_nodes = {1, 4, 9};
  save_scores(s, dir / "s.json");
  const ImportanceScores r = load_scores(dir / "s.json");
  CHECK(r.alpha == s.alpha);
  CHECK(r.pre_scores == s.pre_scores);
  CHECK(r.score_train_nodes == s.score_train_nodes);
  CHECK(r.loss_trace == s.loss_trace);
  CHECK(r.epochs_run == 5);
  CHECK(r.lambda == s.lambda);
  test::write_text(dir / "bad.json", R"({"alpha": "x"})");
  CHECK_THROWS_AS(load_scores(dir / "bad.json"), ConfigError);
  ImportanceScores bad = s;
  bad.alpha(0) = -0.1;
  CHECK_THROWS_AS(validate(bad, 3), InvariantError);
  CHECK_THROWS_AS(validate(s, 4), InvariantError);
}
