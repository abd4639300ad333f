#include "disent/model/config.hpp"

#include <cmath>

#include "disent/numerics/errors.hpp"

namespace disent::model {

std::string_view to_string(Ablation ablation) {
  switch (ablation) {
    case Ablation::kFull: return "full";
    case Ablation::kOneHeadOneSubset: return "one_head_one_subset";
    case Ablation::kComplementMask: return "complement_mask";
    case Ablation::kNoDisentangle: return "no_disentangle";
  }
  return "full";
}

std::optional<Ablation> parse_ablation(std::string_view text) {
  for (Ablation a : {Ablation::kFull, Ablation::kOneHeadOneSubset, Ablation::kComplementMask,
                     Ablation::kNoDisentangle}) {
    if (text == to_string(a)) return a;
  }
  return std::nullopt;
}

std::size_t ModelConfig::num_maps() const {
  return ablation == Ablation::kComplementMask ? 2 : num_heads;
}

std::vector<std::string> ModelConfig::validate() const {
  std::vector<std::string> errors;
  if (num_attributes == 0) errors.emplace_back("num_attributes must be positive");
  if (channels_in == 0) errors.emplace_back("channels_in must be positive");
  if (latent_channels == 0) errors.emplace_back("latent_channels must be positive");
  if (num_heads == 0) errors.emplace_back("num_heads must be at least 1");
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) {
    errors.emplace_back("leaky_slope must lie in (0, 1)");
  }
  if (batch_size == 0) errors.emplace_back("batch_size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    errors.emplace_back("learning_rate must be a positive finite number");
  }
  const bool single_head_variant =
      ablation == Ablation::kOneHeadOneSubset || ablation == Ablation::kComplementMask;
  if (single_head_variant && num_heads != 1) {
    errors.emplace_back("ablation " + std::string(to_string(ablation)) +
                        " requires num_heads = 1");
  }
  if (num_heads > 2 && ablation != Ablation::kFull) {
    errors.emplace_back("runs with more than two heads only support ablation full");
  }
  return errors;
}

void ModelConfig::require_valid() const {
  const auto errors = validate();
  if (errors.empty()) return;
  std::string msg = "invalid model config:";
  for (const auto& e : errors) msg += "\n  " + e;
  throw ContractError(msg);
}

}  // namespace disent::model
