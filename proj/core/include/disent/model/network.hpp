#pragma once

#include <array>
#include <span>
#include <vector>

#include "disent/model/config.hpp"
#include "disent/model/params.hpp"
#include "disent/numerics/tape.hpp"

namespace disent::model {

struct LinearVars {
  Var weight;
  Var bias;
};

// ModelParams registered on a tape.
struct BoundParams {
  std::array<LinearVars, 3> encoder;
  std::vector<std::array<LinearVars, 3>> heads;  // query, key, value
  std::array<LinearVars, 3> decoder;

  // Tracks every tensor so backward() fills its gradient.
  static BoundParams watch(Tape& tape, ModelParams& params);
  // Read-only view for inference.
  static BoundParams borrow(Tape& tape, const ModelParams& params);
  // Rebuilds the structure from vars in ModelParams::tensors() order.
  static BoundParams from_vars(std::span<const Var> vars, std::size_t num_heads);
};

// Per-attribute MLP along the channel axis: [B x M x channels_in] -> [B x M x C].
Var encode(const BoundParams& params, const Var& x, double slope);

struct HeadOutput {
  Var weights;   // [B x M x M], row-stochastic
  Var features;  // [B x M x C] = weights . value
};

// Scaled dot-product self-attention of one head over the attributes of each sample.
HeadOutput attention_head(const BoundParams& params, const Var& z, std::size_t head);

// Mirror of the encoder: [B x M x C] -> [B x M x channels_in].
Var decode(const BoundParams& params, const Var& features, double slope);

// Mean cosine similarity between attention maps, averaged over all unordered
// head pairs. Maps are [M x M] (one sample) or [B x M x M] (batch mean). Zero
// for fewer than two maps.
Var disentangling_loss(Tape& tape, std::span<const Var> maps);

// Sum over reconstructions of the per-element MSE against x.
Var reconstruction_loss(const Var& x, std::span<const Var> reconstructions);

struct ForwardGraph {
  std::vector<Var> maps;
  std::vector<Var> reconstructions;
  Var loss_d;
  Var loss_r;
  Var loss_overall;
};

// encode -> heads -> decode per map -> losses, honoring config.ablation.
ForwardGraph build_forward(const BoundParams& params, const Var& x, const ModelConfig& config);

// Values of one forward pass.
struct ForwardArtifacts {
  std::vector<Tensor> attention_maps;   // num_maps() x [B x M x M]
  std::vector<Tensor> reconstructions;  // num_maps() x [B x M x channels_in]
  double loss_d = 0.0;
  double loss_r = 0.0;
  double loss_overall = 0.0;

  static ForwardArtifacts from_graph(const ForwardGraph& graph);
};

// Accepts [B x M x channels_in] or a single sample [M x channels_in].
ForwardArtifacts forward_batch(const ModelParams& params, const ModelConfig& config,
                               const Tensor& x);

// Plain-tensor conveniences for single samples or batches.
Tensor encode(const ModelParams& params, const ModelConfig& config, const Tensor& x);
std::pair<Tensor, Tensor> attention_head(const ModelParams& params, const Tensor& z,
                                         std::size_t head);

// Sum over maps and elements of squared reconstruction error, per sample of
// `x` ([N x M x channels_in]), evaluated in chunks of `chunk` samples.
std::vector<double> anomaly_scores(const ModelParams& params, const ModelConfig& config,
                                   const Tensor& x, std::size_t chunk = 1024);
// Single sample [M x channels_in].
double anomaly_score(const ModelParams& params, const ModelConfig& config, const Tensor& sample);

// Per-sample score from precomputed reconstructions of a batch.
std::vector<double> reconstruction_scores(const Tensor& x, std::span<const Tensor> reconstructions);

}  // namespace disent::model
