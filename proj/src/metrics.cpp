#include "gerk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "gerk/error.hpp"

namespace gerk {

double f1_score(std::span<const Label> predictions, std::span<const Label> labels, F1Average average) {
  if (predictions.size() != labels.size()) throw ConfigError("prediction and label counts differ");
  if (predictions.empty()) throw ConfigError("F1 of an empty prediction set is undefined");

  if (average == F1Average::kMicro) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(labels.size());
  }

  struct Counts {
    double tp = 0, fp = 0, fn = 0;
  };
  std::map<Label, Counts> per_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predictions[i] == labels[i]) {
      per_class[labels[i]].tp += 1;
    } else {
      per_class[predictions[i]].fp += 1;
      per_class[labels[i]].fn += 1;
    }
  }
  double total = 0.0;
  for (const auto& [cls, c] : per_class) {
    const double denom = 2 * c.tp + c.fp + c.fn;
    total += denom > 0 ? 2 * c.tp / denom : 0.0;
  }
  return total / static_cast<double>(per_class.size());
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) return {};
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

namespace {

std::vector<double> ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConfigError("rank correlation needs equal-length inputs");
  if (a.size() < 2) return 0.0;
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const auto sa = mean_std(ra);
  const auto sb = mean_std(rb);
  if (sa.std == 0.0 || sb.std == 0.0) return 0.0;
  double cov = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) cov += (ra[i] - sa.mean) * (rb[i] - sb.mean);
  cov /= static_cast<double>(ra.size());
  return cov / (sa.std * sb.std);
}

}  // namespace gerk
