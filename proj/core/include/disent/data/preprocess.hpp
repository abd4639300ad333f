#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "disent/numerics/tensor.hpp"

namespace disent::data {

// Reshaping of an M-attribute row into model input [attributes x channels].
enum class Preprocessing {
  kNone,        // M x 1
  kPatch3xM2,   // 3 overlapping windows of ceil(M/2)
  kPatch2xM2,   // 2 windows of ceil(M/2)
  kPatch2x3M4,  // 2 overlapping windows of ceil(3M/4)
  kPatch3xM3,   // 3 windows of ceil(M/3)
};

std::string_view to_string(Preprocessing p);
std::optional<Preprocessing> parse_preprocessing(std::string_view text);

// Windows over the attribute axis: each starts at offsets[i] and spans `length`
// attributes. Windows are spread evenly from the first to the last attribute,
// offset_i = floor(i * (M - length) / (count - 1)); for the 3 x M/2 layout this
// gives begin / centered (floor(M/4)) / end.
struct PatchLayout {
  std::size_t length = 0;
  std::vector<std::size_t> offsets;
};

// Throws ContractError for M < 2 or Preprocessing::kNone.
PatchLayout patch_layout(std::size_t num_attributes, Preprocessing kind);

// [N x M] -> [N x windows x length].
Tensor patch_split(const Tensor& matrix, Preprocessing kind = Preprocessing::kPatch3xM2);

// [N x M] -> model input: [N x M x 1] for kNone, otherwise patch_split.
Tensor to_model_input(const Tensor& matrix, Preprocessing kind);

}  // namespace disent::data
