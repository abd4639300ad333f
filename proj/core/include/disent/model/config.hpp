#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace disent::model {

// Architectural ablations of the full model.
enum class Ablation {
  kFull,              // H heads, disentangling + reconstruction loss
  kOneHeadOneSubset,  // single head, reconstruction loss only
  kComplementMask,    // single head; second map is 1 - w, reconstruction loss only
  kNoDisentangle,     // H heads, reconstruction loss only
};

std::string_view to_string(Ablation ablation);
std::optional<Ablation> parse_ablation(std::string_view text);

struct ModelConfig {
  std::size_t num_attributes = 1;   // M
  std::size_t channels_in = 1;      // feature channels per attribute
  std::size_t latent_channels = 128;
  std::size_t num_heads = 2;
  double leaky_slope = 0.01;
  std::size_t epochs = 100;
  std::size_t batch_size = 512;
  double learning_rate = 1e-4;
  std::uint64_t seed = 0;
  Ablation ablation = Ablation::kFull;

  // Attention maps (and reconstructions) produced per sample: the head count,
  // or 2 for the complement-mask ablation.
  std::size_t num_maps() const;
  bool uses_disentangling_loss() const { return ablation == Ablation::kFull; }

  // Human-readable violations; empty when the config is usable.
  std::vector<std::string> validate() const;
  // Throws ContractError listing every violation.
  void require_valid() const;
};

}  // namespace disent::model
