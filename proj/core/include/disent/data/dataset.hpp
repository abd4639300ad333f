#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "disent/numerics/tensor.hpp"

namespace disent::data {

// Labeled tabular data: N x D features, labels 0 (normal) / 1 (anomaly).
struct RawDataset {
  std::string name;
  std::vector<std::string> feature_names;
  Tensor features;
  std::vector<int> labels;  // all 0 when the file had no label column
  bool has_labels = true;

  std::size_t num_rows() const { return labels.size(); }
  std::size_t num_features() const { return features.dim(1); }
  std::size_t num_anomalies() const;
};

enum class Scaling { kZScore, kMinMax };

// Per-attribute affine map x -> (x - location) / scale.
struct NormalizationStats {
  Scaling method = Scaling::kZScore;
  std::vector<double> location;
  std::vector<double> scale;  // 0 marks a constant attribute, mapped to 0

  bool empty() const { return location.empty(); }
  Tensor apply(const Tensor& matrix) const;
};

// One-class protocol split. Row provenance refers to the RawDataset row index.
struct DatasetSplit {
  Tensor train;                 // N_train x D, normals (plus contaminants)
  Tensor test;                  // N_test x D
  std::vector<int> test_labels;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  std::vector<bool> train_contaminant;  // parallel to train_rows
  NormalizationStats normalization;
};

enum class LabelMode { kRequired, kOptional };

// Reads a header-row CSV; `label_column` holds 0/1. With LabelMode::kOptional a
// missing label column yields unlabeled rows (has_labels = false). Throws
// ParseError naming the row and column of any malformed cell.
RawDataset load_csv(const std::filesystem::path& path, const std::string& label_column = "label",
                    LabelMode mode = LabelMode::kRequired);

// Random half (floor) of the normals form the training set; the remaining
// normals and every anomaly form the test set. Deterministic in `seed`.
DatasetSplit split_train_test(const RawDataset& ds, std::uint64_t seed);

// Fits per-attribute statistics on split.train only and applies them to both
// matrices. z-score uses the population std; attributes with std (or range)
// below 1e-12 map to 0.
NormalizationStats fit_normalization(const Tensor& train, Scaling method = Scaling::kZScore);
DatasetSplit normalize(const DatasetSplit& split, Scaling method = Scaling::kZScore);

// Moves floor(ratio * N_train / (1 - ratio)) randomly chosen anomalies from the
// test set into the training set (where they are unlabeled). ratio in [0, 0.05].
DatasetSplit contaminate(const DatasetSplit& split, double ratio, std::uint64_t seed);

// Number of contaminants contaminate() injects into a training set of `train_size`.
std::size_t contaminant_count(std::size_t train_size, double ratio);

}  // namespace disent::data
