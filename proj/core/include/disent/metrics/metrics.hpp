#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace disent::metrics {

// Area under the ROC curve as the Mann-Whitney statistic:
// P(anomaly score > normal score) + 0.5 P(tie), via one sort with midranks.
// Labels are 1 for anomalies. Throws ContractError unless both classes occur.
double auc_roc(std::span<const double> scores, std::span<const int> labels);

// Average precision: sum over descending score blocks of
// (recall gained in the block) x (precision after the block). Tied scores are
// processed as one block.
double auc_pr(std::span<const double> scores, std::span<const int> labels);

struct ScoreReport {
  std::vector<double> scores;
  std::vector<int> labels;
  double auc_roc = 0.0;
  double auc_pr = 0.0;
  std::uint64_t trial_seed = 0;
};

ScoreReport make_report(std::vector<double> scores, std::vector<int> labels,
                        std::uint64_t trial_seed);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

struct TrialSummary {
  MeanStd auc_pr;
  MeanStd auc_roc;
  std::size_t trials = 0;
};

MeanStd mean_std(std::span<const double> values);
TrialSummary aggregate_trials(std::span<const ScoreReport> reports);

}  // namespace disent::metrics
