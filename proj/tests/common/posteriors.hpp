#pragma once

#include <random>
#include <vector>

#include "gerk/aggregation.hpp"

namespace gerk::test {

// m row-stochastic matrices of shape rows x C. Entries are rounded to a
// coarse grid now and then so exact ties show up.
inline ShardPosteriors random_posteriors(int m, Eigen::Index rows, int classes, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution coarse(0.3);
  ShardPosteriors sp;
  for (int i = 0; i < m; ++i) {
    Matrix p(rows, classes);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const bool grid = coarse(rng);
      for (int c = 0; c < classes; ++c) p(r, c) = grid ? std::floor(unit(rng) * 3.0) + 1.0 : unit(rng) + 1e-3;
      p.row(r) /= p.row(r).sum();
    }
    sp.push_back(std::move(p));
  }
  return sp;
}

// Per-shard argmax, then count votes and take the first class with the most.
inline LabelList brute_force_vote(const ShardPosteriors& sp) {
  const Eigen::Index rows = sp.front().rows();
  const Eigen::Index classes = sp.front().cols();
  LabelList out(static_cast<std::size_t>(rows));
  for (Eigen::Index r = 0; r < rows; ++r) {
    std::vector<int> votes(static_cast<std::size_t>(classes), 0);
    for (const auto& p : sp) {
      Eigen::Index best = 0;
      for (Eigen::Index c = 0; c < classes; ++c) {
        if (p(r, c) > p(r, best)) best = c;
      }
      ++votes[static_cast<std::size_t>(best)];
    }
    int winner = 0;
    for (int c = 0; c < static_cast<int>(classes); ++c) {
      if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(winner)]) winner = c;
    }
    out[static_cast<std::size_t>(r)] = winner;
  }
  return out;
}

struct PlantedInstance {
  ShardPosteriors posteriors;
  LabelList labels;
};

// Shard 0 outputs the one-hot truth, the others uniform.
inline PlantedInstance planted_oracle(int m, Eigen::Index rows, int classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> cls(0, classes - 1);
  PlantedInstance inst;
  Matrix truth = Matrix::Zero(rows, classes);
  for (Eigen::Index r = 0; r < rows; ++r) {
    inst.labels.push_back(cls(rng));
    truth(r, inst.labels.back()) = 1.0;
  }
  inst.posteriors.push_back(truth);
  for (int i = 1; i < m; ++i) inst.posteriors.push_back(Matrix::Constant(rows, classes, 1.0 / classes));
  return inst;
}

}  // namespace gerk::test
