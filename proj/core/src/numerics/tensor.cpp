#include "disent/numerics/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "disent/numerics/errors.hpp"

namespace disent {

Shape::Shape(std::initializer_list<std::size_t> extents)
    : Shape(std::span<const std::size_t>(extents.begin(), extents.size())) {}

Shape::Shape(std::span<const std::size_t> extents) {
  if (extents.size() > kMaxRank) {
    throw DimensionError("tensor rank " + std::to_string(extents.size()) +
                         " exceeds the supported maximum of 3");
  }
  for (std::size_t extent : extents) {
    if (extent == 0) throw DimensionError("tensor extents must be positive");
    extents_[rank_++] = extent;
  }
}

std::size_t Shape::num_elements() const {
  std::size_t n = 1;
  for (std::size_t i = 0; i < rank_; ++i) n *= extents_[i];
  return n;
}

std::size_t Shape::leading() const {
  std::size_t n = 1;
  for (std::size_t i = 0; i + 1 < rank_; ++i) n *= extents_[i];
  return n;
}

std::string Shape::str() const {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < rank_; ++i) {
    if (i) out << 'x';
    out << extents_[i];
  }
  out << ']';
  return out.str();
}

bool operator==(const Shape& a, const Shape& b) {
  if (a.rank_ != b.rank_) return false;
  for (std::size_t i = 0; i < a.rank_; ++i) {
    if (a.extents_[i] != b.extents_[i]) return false;
  }
  return true;
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(shape), data_(shape.num_elements(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(shape), data_(std::move(values)) {
  if (data_.size() != shape_.num_elements()) {
    throw DimensionError("tensor of shape " + shape_.str() + " needs " +
                         std::to_string(shape_.num_elements()) + " values, got " +
                         std::to_string(data_.size()));
  }
}

Tensor Tensor::scalar(double value) { return Tensor(Shape{}, std::vector<double>{value}); }

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor(Shape{values.size()}, std::vector<double>(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n_rows = rows.size();
  const std::size_t n_cols = n_rows ? rows.begin()->size() : 0;
  std::vector<double> values;
  values.reserve(n_rows * n_cols);
  for (const auto& row : rows) {
    if (row.size() != n_cols) throw DimensionError("ragged matrix literal");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor(Shape{n_rows, n_cols}, std::move(values));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor eye(Shape{n, n});
  for (std::size_t i = 0; i < n; ++i) eye.at(i, i) = 1.0;
  return eye;
}

double& Tensor::at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }

double Tensor::at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

double& Tensor::at(std::size_t i, std::size_t j, std::size_t k) {
  return data_[(i * shape_[1] + j) * shape_[2] + k];
}

double Tensor::at(std::size_t i, std::size_t j, std::size_t k) const {
  return data_[(i * shape_[1] + j) * shape_[2] + k];
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw DimensionError("item() on tensor of shape " + shape_.str());
  }
  return data_[0];
}

void Tensor::set_requires_grad(bool on) {
  requires_grad_ = on;
  if (on) {
    grad_.assign(data_.size(), 0.0);
  } else {
    grad_.clear();
    grad_.shrink_to_fit();
  }
}

void Tensor::zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }

Tensor Tensor::reshaped(Shape shape) const {
  if (shape.num_elements() != data_.size()) {
    throw DimensionError("cannot reshape " + shape_.str() + " to " + shape.str());
  }
  return Tensor(shape, data_);
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::check_finite(std::string_view what) const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      std::ostringstream msg;
      msg << what << ": non-finite value " << data_[i] << " at flat index " << i
          << " of tensor " << shape_.str();
      throw NonFiniteError(msg.str());
    }
  }
}

}  // namespace disent
