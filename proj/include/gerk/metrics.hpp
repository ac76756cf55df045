#pragma once

#include <span>
#include <vector>

#include "gerk/types.hpp"

namespace gerk {

enum class F1Average { kMicro, kMacro };

/// F1 of single-label multi-class predictions. Micro-averaging reduces to
/// accuracy; macro averages per-class F1 over classes present in either
/// the predictions or the labels.
double f1_score(std::span<const Label> predictions, std::span<const Label> labels,
                F1Average average = F1Average::kMicro);

inline double micro_f1(std::span<const Label> predictions, std::span<const Label> labels) {
  return f1_score(predictions, labels, F1Average::kMicro);
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

MeanStd mean_std(std::span<const double> values);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace gerk
