#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "disent/data/dataset.hpp"
#include "disent/experiment/experiment_config.hpp"
#include "disent/metrics/metrics.hpp"
#include "disent/model/checkpoint.hpp"
#include "disent/model/trainer.hpp"

namespace disent::experiment {

// Loads the experiment's dataset from dataset_path or the registry lookup.
// Throws Error when it cannot be found.
data::RawDataset load_dataset(const ExperimentConfig& config);

// Model-ready data for one trial: split -> normalize -> contaminate -> reshape.
struct PreparedTrial {
  data::DatasetSplit split;
  Tensor train_input;  // [N_train x attributes x channels]
  Tensor test_input;   // [N_test x attributes x channels]
  model::ModelConfig model;  // config.model with data shape and trial seed filled in
};

PreparedTrial prepare_trial(const ExperimentConfig& config, const data::RawDataset& dataset,
                            std::uint64_t seed);

struct TrialResult {
  std::uint64_t seed = 0;
  model::ModelConfig model;
  model::FitResult fit;
  metrics::ScoreReport report;
  std::vector<std::size_t> test_rows;   // dataset row of each score
  std::vector<Tensor> mean_attention;   // one [M x M] map per head
  data::NormalizationStats normalization;
};

TrialResult run_trial(const ExperimentConfig& config, const data::RawDataset& dataset,
                      std::uint64_t seed, const model::StepObserver& observer = {});

// Per-map attention weights averaged over the rows of `input` selected by
// `include` (all rows when empty).
std::vector<Tensor> mean_attention_maps(const model::ModelParams& params,
                                        const model::ModelConfig& config, const Tensor& input,
                                        const std::vector<bool>& include = {});

// Writes each map as `<prefix>_head<h>.csv` (row-major, no header) and returns
// the paths written.
std::vector<std::filesystem::path> write_attention_maps(const std::vector<Tensor>& maps,
                                                        const std::filesystem::path& prefix);

// Averages over every row of `input` and writes the maps.
std::vector<std::filesystem::path> export_attention_maps(const model::ModelParams& params,
                                                         const model::ModelConfig& config,
                                                         const Tensor& input,
                                                         const std::filesystem::path& prefix);

// Checkpoint carrying everything needed to score raw rows: parameters,
// normalization statistics and the preprocessing layout.
model::Checkpoint make_checkpoint(const ExperimentConfig& config, const TrialResult& trial);

// Applies a checkpoint's normalization and preprocessing to raw feature rows.
Tensor checkpoint_inputs(const model::Checkpoint& checkpoint, const Tensor& features);

struct RunResult {
  std::vector<TrialResult> trials;
  metrics::TrialSummary summary;
  std::vector<std::filesystem::path> files;  // relative to the output directory
};

// Runs every trial and writes into config.output_dir:
//   config.ini, trial_<seed>_scores.csv, trial_<seed>_loss.csv,
//   trial_<seed>_attention_head<h>.csv, [trial_<seed>.ckpt], metrics.json,
//   manifest.json (lists the files; "complete": false if a step failed).
// Errors are rethrown after the incomplete manifest is written.
RunResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

// The metrics.json document for a finished run.
std::string metrics_json(const ExperimentConfig& config, const RunResult& result);

}  // namespace disent::experiment
