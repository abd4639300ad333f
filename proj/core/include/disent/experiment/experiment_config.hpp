#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "disent/data/dataset.hpp"
#include "disent/data/preprocess.hpp"
#include "disent/experiment/key_value.hpp"
#include "disent/model/config.hpp"

namespace disent::experiment {

// One experiment: a dataset, a model/training configuration and a trial plan.
// num_attributes / channels_in of `model` are filled in from the data at run time.
struct ExperimentConfig {
  std::string dataset;
  std::optional<std::filesystem::path> dataset_path;  // overrides registry lookup
  std::optional<std::string> label_column;  // default: registry entry, else "label"
  model::ModelConfig model;
  data::Preprocessing preprocessing = data::Preprocessing::kNone;
  data::Scaling scaling = data::Scaling::kZScore;
  double contamination_ratio = 0.0;
  std::size_t trials = 3;
  std::uint64_t base_seed = 0;
  std::vector<std::uint64_t> trial_seeds;
  std::filesystem::path output_dir = "results";
  bool save_checkpoints = false;
};

struct ValidationResult {
  std::optional<ExperimentConfig> config;  // set iff errors is empty
  std::vector<std::string> errors;         // "<field path>: <problem>"

  bool ok() const { return errors.empty(); }
};

// Recognized keys (INI sections map to the prefix before the dot):
//   dataset, dataset_path, label_column
//   model.latent_channels, model.num_heads, model.leaky_slope, model.ablation
//   train.epochs, train.batch_size, train.learning_rate
//   data.preprocessing, data.normalization, data.contamination_ratio
//   run.trials, run.seed, run.trial_seeds, run.output_dir, run.save_checkpoints
// Unset fields take the dataset's registry defaults. Single-head ablations
// default to one head when model.num_heads is not given.
ValidationResult validate_config(const KeyValues& values);

// Throws ContractError listing every violation.
ExperimentConfig require_config(const KeyValues& values);

// Canonical `key = value` text for every field, in a fixed order. Re-parsing it
// yields the same config.
std::string serialize_config(const ExperimentConfig& config);

// FNV-1a 64 of the serialized config without the output-only fields
// (run.output_dir, run.save_checkpoints), as 16 lower-case hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace disent::experiment
