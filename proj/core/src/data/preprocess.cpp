#include "disent/data/preprocess.hpp"

#include <cstring>
#include <string>

#include "disent/numerics/errors.hpp"

namespace disent::data {
namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

}  // namespace

std::string_view to_string(Preprocessing p) {
  switch (p) {
    case Preprocessing::kNone: return "none";
    case Preprocessing::kPatch3xM2: return "patch_3xM2";
    case Preprocessing::kPatch2xM2: return "patch_2xM2";
    case Preprocessing::kPatch2x3M4: return "patch_2x3M4";
    case Preprocessing::kPatch3xM3: return "patch_3xM3";
  }
  return "none";
}

std::optional<Preprocessing> parse_preprocessing(std::string_view text) {
  for (Preprocessing p : {Preprocessing::kNone, Preprocessing::kPatch3xM2, Preprocessing::kPatch2xM2,
                          Preprocessing::kPatch2x3M4, Preprocessing::kPatch3xM3}) {
    if (text == to_string(p)) return p;
  }
  return std::nullopt;
}

PatchLayout patch_layout(std::size_t m, Preprocessing kind) {
  if (m < 2) {
    throw ContractError("patch_split: needs at least 2 attributes, got " + std::to_string(m));
  }
  std::size_t count = 0;
  PatchLayout layout;
  switch (kind) {
    case Preprocessing::kNone:
      throw ContractError("patch_layout: no layout for preprocessing 'none'");
    case Preprocessing::kPatch3xM2:
      count = 3;
      layout.length = ceil_div(m, 2);
      break;
    case Preprocessing::kPatch2xM2:
      count = 2;
      layout.length = ceil_div(m, 2);
      break;
    case Preprocessing::kPatch2x3M4:
      count = 2;
      layout.length = ceil_div(3 * m, 4);
      break;
    case Preprocessing::kPatch3xM3:
      count = 3;
      layout.length = ceil_div(m, 3);
      break;
  }
  const std::size_t span = m - layout.length;
  for (std::size_t i = 0; i < count; ++i) layout.offsets.push_back(i * span / (count - 1));
  return layout;
}

Tensor patch_split(const Tensor& matrix, Preprocessing kind) {
  if (matrix.rank() != 2) throw DimensionError("patch_split: expects [N x M], got " + matrix.shape().str());
  const std::size_t n = matrix.dim(0), m = matrix.dim(1);
  const PatchLayout layout = patch_layout(m, kind);
  const std::size_t windows = layout.offsets.size();
  Tensor out(Shape{n, windows, layout.length});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t w = 0; w < windows; ++w) {
      std::memcpy(&out.at(r, w, 0), matrix.data() + r * m + layout.offsets[w],
                  layout.length * sizeof(double));
    }
  }
  return out;
}

Tensor to_model_input(const Tensor& matrix, Preprocessing kind) {
  if (kind == Preprocessing::kNone) return matrix.reshaped(Shape{matrix.dim(0), matrix.dim(1), 1});
  return patch_split(matrix, kind);
}

}  // namespace disent::data
