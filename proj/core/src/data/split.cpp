#include <algorithm>
#include <cmath>
#include <cstring>

#include "disent/data/dataset.hpp"
#include "disent/numerics/errors.hpp"
#include "disent/numerics/random.hpp"

namespace disent::data {
namespace {

constexpr double kConstantTolerance = 1e-12;

Tensor take_rows(const Tensor& matrix, std::span<const std::size_t> rows) {
  const std::size_t width = matrix.dim(1);
  Tensor out(Shape{rows.size(), width});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::memcpy(out.data() + i * width, matrix.data() + rows[i] * width, width * sizeof(double));
  }
  return out;
}

}  // namespace

Tensor NormalizationStats::apply(const Tensor& matrix) const {
  const std::size_t width = location.size();
  if (matrix.rank() != 2 || matrix.dim(1) != width) {
    throw DimensionError("normalization fitted on " + std::to_string(width) +
                         " attributes applied to " + matrix.shape().str());
  }
  Tensor out(matrix.shape());
  for (std::size_t r = 0; r < matrix.dim(0); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      out.at(r, c) = scale[c] == 0.0 ? 0.0 : (matrix.at(r, c) - location[c]) / scale[c];
    }
  }
  return out;
}

NormalizationStats fit_normalization(const Tensor& train, Scaling method) {
  const std::size_t n = train.dim(0), width = train.dim(1);
  NormalizationStats stats;
  stats.method = method;
  stats.location.assign(width, 0.0);
  stats.scale.assign(width, 0.0);
  for (std::size_t c = 0; c < width; ++c) {
    if (method == Scaling::kZScore) {
      double mean = 0.0;
      for (std::size_t r = 0; r < n; ++r) mean += train.at(r, c);
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const double d = train.at(r, c) - mean;
        var += d * d;
      }
      const double sd = std::sqrt(var / static_cast<double>(n));
      stats.location[c] = mean;
      stats.scale[c] = sd < kConstantTolerance ? 0.0 : sd;
    } else {
      double lo = train.at(0, c), hi = train.at(0, c);
      for (std::size_t r = 1; r < n; ++r) {
        lo = std::min(lo, train.at(r, c));
        hi = std::max(hi, train.at(r, c));
      }
      stats.location[c] = lo;
      stats.scale[c] = hi - lo < kConstantTolerance ? 0.0 : hi - lo;
    }
  }
  return stats;
}

DatasetSplit split_train_test(const RawDataset& ds, std::uint64_t seed) {
  std::vector<std::size_t> normals, anomalies;
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    (ds.labels[i] == 0 ? normals : anomalies).push_back(i);
  }
  if (normals.size() < 2) {
    throw ContractError("split_train_test: need at least 2 normal rows, have " +
                        std::to_string(normals.size()));
  }

  Rng rng(derive_seed(seed, 2));
  rng.shuffle(std::span<std::size_t>(normals));
  const std::size_t n_train = normals.size() / 2;

  DatasetSplit split;
  split.train_rows.assign(normals.begin(), normals.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test_rows.assign(normals.begin() + static_cast<std::ptrdiff_t>(n_train), normals.end());
  split.test_rows.insert(split.test_rows.end(), anomalies.begin(), anomalies.end());
  std::sort(split.train_rows.begin(), split.train_rows.end());
  std::sort(split.test_rows.begin(), split.test_rows.end());

  split.train = take_rows(ds.features, split.train_rows);
  split.test = take_rows(ds.features, split.test_rows);
  for (std::size_t r : split.test_rows) split.test_labels.push_back(ds.labels[r]);
  split.train_contaminant.assign(split.train_rows.size(), false);
  return split;
}

DatasetSplit normalize(const DatasetSplit& split, Scaling method) {
  DatasetSplit out = split;
  out.normalization = fit_normalization(split.train, method);
  out.train = out.normalization.apply(split.train);
  out.test = out.normalization.apply(split.test);
  return out;
}

std::size_t contaminant_count(std::size_t train_size, double ratio) {
  const double exact = ratio * static_cast<double>(train_size) / (1.0 - ratio);
  return static_cast<std::size_t>(std::floor(exact + 1e-9));
}

DatasetSplit contaminate(const DatasetSplit& split, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 0.05)) {
    throw ContractError("contaminate: ratio must lie in [0, 0.05], got " + std::to_string(ratio));
  }
  const std::size_t wanted = contaminant_count(split.train_rows.size(), ratio);
  if (wanted == 0) return split;

  std::vector<std::size_t> candidates;  // positions within the test set
  for (std::size_t i = 0; i < split.test_labels.size(); ++i) {
    if (split.test_labels[i] == 1) candidates.push_back(i);
  }
  if (candidates.size() < wanted) {
    throw ContractError("contaminate: need " + std::to_string(wanted) + " anomalies, test set has " +
                        std::to_string(candidates.size()));
  }
  Rng rng(derive_seed(seed, 3));
  rng.shuffle(std::span<std::size_t>(candidates));
  std::vector<bool> moved(split.test_labels.size(), false);
  for (std::size_t i = 0; i < wanted; ++i) moved[candidates[i]] = true;

  const std::size_t width = split.train.dim(1);
  std::vector<double> train_values(split.train.values().begin(), split.train.values().end());
  std::vector<double> test_values;
  DatasetSplit out;
  out.normalization = split.normalization;
  out.train_rows = split.train_rows;
  out.train_contaminant = split.train_contaminant;
  for (std::size_t i = 0; i < split.test_labels.size(); ++i) {
    const double* row = split.test.data() + i * width;
    if (moved[i]) {
      train_values.insert(train_values.end(), row, row + width);
      out.train_rows.push_back(split.test_rows[i]);
      out.train_contaminant.push_back(true);
    } else {
      test_values.insert(test_values.end(), row, row + width);
      out.test_rows.push_back(split.test_rows[i]);
      out.test_labels.push_back(split.test_labels[i]);
    }
  }
  out.train = Tensor(Shape{out.train_rows.size(), width}, std::move(train_values));
  out.test = Tensor(Shape{out.test_rows.size(), width}, std::move(test_values));
  return out;
}

}  // namespace disent::data
