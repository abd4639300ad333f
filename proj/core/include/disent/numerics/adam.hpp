#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "disent/numerics/tensor.hpp"

namespace disent {

struct AdamOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment buffers for a fixed, ordered list of parameter tensors.
struct AdamState {
  AdamOptions options;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  // Zero moments shaped like `params`.
  static AdamState for_parameters(std::span<Tensor* const> params, AdamOptions options = {});
};

// One bias-corrected Adam update using each parameter's accumulated gradient,
// then zeroes the gradients. Throws ContractError if a parameter carries no
// gradient buffer or the list does not match the state, and NonFiniteError if
// an update produces a non-finite weight.
void adam_step(std::span<Tensor* const> params, AdamState& state);

}  // namespace disent
