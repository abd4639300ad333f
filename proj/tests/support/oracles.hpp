#pragma once

// Independent reference implementations used only by tests. None of these
// call into the library code they check.

#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <vector>

#include "disent/numerics/tensor.hpp"

namespace disent::testing {

inline Tensor random_tensor(Shape shape, std::mt19937_64& gen, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(shape);
  for (double& v : t.values()) v = dist(gen);
  return t;
}

// Triple loop, i-j-k order, one accumulator per output entry.
inline Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor c(Shape{m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a.at(i, p) * b.at(p, j);
      c.at(i, j) = acc;
    }
  }
  return c;
}

// Counts every (anomaly, normal) pair: 1 if the anomaly scores higher, 1/2 on ties.
inline double pairwise_auc_roc(std::span<const double> scores, std::span<const int> labels) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// Enumerates every distinct score as a threshold (predict anomaly iff
// score >= t), recounting precision and recall from scratch at each one, and
// sums (recall increase) x precision.
inline double threshold_average_precision(std::span<const double> scores, std::span<const int> labels) {
  std::set<double, std::greater<>> thresholds(scores.begin(), scores.end());
  std::size_t positives = 0;
  for (int l : labels) positives += (l == 1);
  double ap = 0.0, previous_recall = 0.0;
  for (double t : thresholds) {
    std::size_t tp = 0, predicted = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) {
        ++predicted;
        tp += (labels[i] == 1);
      }
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(predicted);
    ap += (recall - previous_recall) * precision;
    previous_recall = recall;
  }
  return ap;
}

}  // namespace disent::testing
