#pragma once

#include <array>
#include <string>
#include <vector>

#include "disent/model/config.hpp"
#include "disent/numerics/tensor.hpp"

namespace disent::model {

// weight is [in x out], bias is [out].
struct LinearParams {
  Tensor weight;
  Tensor bias;
};

struct HeadParams {
  LinearParams query;
  LinearParams key;
  LinearParams value;
};

// Learnable weights of the network.
//   encoder: channels_in -> C -> C -> C, LeakyReLU after the first two layers
//   heads:   per-head query/key/value projections C -> C
//   decoder: C -> C -> C -> channels_in, mirroring the encoder
struct ModelParams {
  std::array<LinearParams, 3> encoder;
  std::vector<HeadParams> heads;
  std::array<LinearParams, 3> decoder;

  // Every tensor in a fixed canonical order: encoder, heads (q, k, v), decoder;
  // weight before bias.
  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
  // Names parallel to tensors(), e.g. "encoder.0.weight", "head.1.key.bias".
  std::vector<std::string> tensor_names() const;

  void zero_grad();
};

// Deterministic in config.seed: weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
// biases zero. Heads are created for config.num_heads.
ModelParams init_params(const ModelConfig& config);

// Allocates an all-zero parameter set with the shapes implied by `config`.
ModelParams zero_params(const ModelConfig& config);

bool bitwise_equal(const ModelParams& a, const ModelParams& b);

}  // namespace disent::model
