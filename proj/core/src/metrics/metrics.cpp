#include "disent/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "disent/numerics/errors.hpp"

namespace disent::metrics {
namespace {

struct ClassCounts {
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

ClassCounts check_inputs(std::span<const double> scores, std::span<const int> labels,
                         const char* metric) {
  if (scores.size() != labels.size()) {
    throw DimensionError(std::string(metric) + ": " + std::to_string(scores.size()) +
                         " scores but " + std::to_string(labels.size()) + " labels");
  }
  ClassCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw ContractError(std::string(metric) + ": labels must be 0 or 1");
    }
    if (!std::isfinite(scores[i])) {
      throw NonFiniteError(std::string(metric) + ": non-finite score at index " + std::to_string(i));
    }
    (labels[i] == 1 ? c.positives : c.negatives) += 1;
  }
  if (c.positives == 0 || c.negatives == 0) {
    throw ContractError(std::string(metric) + ": both classes must be present");
  }
  return c;
}

std::vector<std::size_t> argsort(std::span<const double> scores, bool descending) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return descending ? scores[a] > scores[b] : scores[a] < scores[b];
  });
  return order;
}

}  // namespace

double auc_roc(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = check_inputs(scores, labels, "auc_roc");
  const auto order = argsort(scores, false);

  // Sum of 1-based midranks of the positives.
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) rank_sum += midrank;
    }
    i = j + 1;
  }
  const double p = static_cast<double>(c.positives);
  const double n = static_cast<double>(c.negatives);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double auc_pr(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = check_inputs(scores, labels, "auc_pr");
  const auto order = argsort(scores, true);

  const double total_pos = static_cast<double>(c.positives);
  double tp = 0.0, fp = 0.0, ap = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t block_pos = 0, block_neg = 0;
    std::size_t j = i;
    for (; j < order.size() && scores[order[j]] == scores[order[i]]; ++j) {
      (labels[order[j]] == 1 ? block_pos : block_neg) += 1;
    }
    tp += static_cast<double>(block_pos);
    fp += static_cast<double>(block_neg);
    if (block_pos > 0) ap += (static_cast<double>(block_pos) / total_pos) * (tp / (tp + fp));
    i = j;
  }
  return ap;
}

ScoreReport make_report(std::vector<double> scores, std::vector<int> labels,
                        std::uint64_t trial_seed) {
  ScoreReport r;
  r.auc_roc = auc_roc(scores, labels);
  r.auc_pr = auc_pr(scores, labels);
  r.scores = std::move(scores);
  r.labels = std::move(labels);
  r.trial_seed = trial_seed;
  return r;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw ContractError("mean_std: no values");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / n)};
}

TrialSummary aggregate_trials(std::span<const ScoreReport> reports) {
  if (reports.empty()) throw ContractError("aggregate_trials: no reports");
  std::vector<double> pr, roc;
  for (const ScoreReport& r : reports) {
    pr.push_back(r.auc_pr);
    roc.push_back(r.auc_roc);
  }
  return {mean_std(pr), mean_std(roc), reports.size()};
}

}  // namespace disent::metrics
