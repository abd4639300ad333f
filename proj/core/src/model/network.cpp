#include "disent/model/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "disent/numerics/errors.hpp"
#include "disent/numerics/ops.hpp"

namespace disent::model {
namespace {

LinearVars watch_linear(Tape& tape, LinearParams& p) {
  return {tape.watch(p.weight), tape.watch(p.bias)};
}

LinearVars borrow_linear(Tape& tape, const LinearParams& p) {
  return {tape.borrow(p.weight), tape.borrow(p.bias)};
}

Var apply(const LinearVars& lin, const Var& x) { return ops::linear(x, lin.weight, lin.bias); }

Var mlp(const std::array<LinearVars, 3>& layers, const Var& x, double slope) {
  Var h = ops::leaky_relu(apply(layers[0], x), slope);
  h = ops::leaky_relu(apply(layers[1], h), slope);
  return apply(layers[2], h);
}

struct Reconstruction {
  std::vector<Var> maps;
  std::vector<Var> reconstructions;
};

void check_input(const Shape& s, const ModelConfig& config) {
  if (s.rank() != 3 || s[1] != config.num_attributes || s[2] != config.channels_in) {
    throw DimensionError("model input must be [B x " + std::to_string(config.num_attributes) +
                         " x " + std::to_string(config.channels_in) + "], got " + s.str());
  }
}

Reconstruction reconstruct(const BoundParams& params, const Var& x, const ModelConfig& config) {
  check_input(x.shape(), config);
  if (params.heads.size() != config.num_heads) {
    throw DimensionError("parameter set has " + std::to_string(params.heads.size()) +
                         " heads, config expects " + std::to_string(config.num_heads));
  }
  const Var z = encode(params, x, config.leaky_slope);

  Reconstruction out;
  if (config.ablation == Ablation::kComplementMask) {
    const HeadOutput head = attention_head(params, z, 0);
    const Var complement = ops::affine(head.weights, -1.0, 1.0);
    const Var value = apply(params.heads[0][2], z);
    out.maps = {head.weights, complement};
    out.reconstructions = {decode(params, head.features, config.leaky_slope),
                           decode(params, ops::batched_matmul(complement, value),
                                  config.leaky_slope)};
    return out;
  }
  for (std::size_t h = 0; h < config.num_heads; ++h) {
    const HeadOutput head = attention_head(params, z, h);
    out.maps.push_back(head.weights);
    out.reconstructions.push_back(decode(params, head.features, config.leaky_slope));
  }
  return out;
}

Tensor as_batch(const Tensor& x, const ModelConfig& config) {
  if (x.rank() == 2) return x.reshaped(Shape{1, x.dim(0), x.dim(1)});
  if (x.rank() == 1 && config.channels_in == 1) return x.reshaped(Shape{1, x.dim(0), 1});
  return x;
}

}  // namespace

BoundParams BoundParams::watch(Tape& tape, ModelParams& params) {
  BoundParams b;
  for (std::size_t i = 0; i < 3; ++i) b.encoder[i] = watch_linear(tape, params.encoder[i]);
  for (HeadParams& head : params.heads) {
    b.heads.push_back({watch_linear(tape, head.query), watch_linear(tape, head.key),
                       watch_linear(tape, head.value)});
  }
  for (std::size_t i = 0; i < 3; ++i) b.decoder[i] = watch_linear(tape, params.decoder[i]);
  return b;
}

BoundParams BoundParams::borrow(Tape& tape, const ModelParams& params) {
  BoundParams b;
  for (std::size_t i = 0; i < 3; ++i) b.encoder[i] = borrow_linear(tape, params.encoder[i]);
  for (const HeadParams& head : params.heads) {
    b.heads.push_back({borrow_linear(tape, head.query), borrow_linear(tape, head.key),
                       borrow_linear(tape, head.value)});
  }
  for (std::size_t i = 0; i < 3; ++i) b.decoder[i] = borrow_linear(tape, params.decoder[i]);
  return b;
}

BoundParams BoundParams::from_vars(std::span<const Var> vars, std::size_t num_heads) {
  const std::size_t expected = 2 * (3 + 3 * num_heads + 3);
  if (vars.size() != expected) {
    throw ContractError("from_vars: expected " + std::to_string(expected) + " tensors, got " +
                        std::to_string(vars.size()));
  }
  std::size_t next = 0;
  auto take = [&] {
    LinearVars lin{vars[next], vars[next + 1]};
    next += 2;
    return lin;
  };
  BoundParams b;
  for (auto& lin : b.encoder) lin = take();
  for (std::size_t h = 0; h < num_heads; ++h) {
    std::array<LinearVars, 3> head;
    for (auto& lin : head) lin = take();
    b.heads.push_back(head);
  }
  for (auto& lin : b.decoder) lin = take();
  return b;
}

Var encode(const BoundParams& params, const Var& x, double slope) {
  return mlp(params.encoder, x, slope);
}

HeadOutput attention_head(const BoundParams& params, const Var& z, std::size_t head) {
  if (head >= params.heads.size()) {
    throw ContractError("attention_head: head " + std::to_string(head) + " out of range");
  }
  const auto& proj = params.heads[head];
  const Var q = apply(proj[0], z);
  const Var k = apply(proj[1], z);
  const Var v = apply(proj[2], z);
  const double inv_sqrt_c = 1.0 / std::sqrt(static_cast<double>(z.shape().back()));
  const Var scores = ops::affine(ops::batched_matmul_transposed(q, k), inv_sqrt_c, 0.0);
  const Var weights = ops::softmax_rows(scores);
  return {weights, ops::batched_matmul(weights, v)};
}

Var decode(const BoundParams& params, const Var& features, double slope) {
  return mlp(params.decoder, features, slope);
}

Var disentangling_loss(Tape& tape, std::span<const Var> maps) {
  if (maps.size() < 2) return tape.constant(Tensor::scalar(0.0));
  Var total;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    for (std::size_t j = i + 1; j < maps.size(); ++j) {
      const Var sim = maps[i].shape().rank() == 3
                          ? ops::mean(ops::batched_cosine_sim(maps[i], maps[j]))
                          : ops::cosine_sim(maps[i], maps[j]);
      total = pairs == 0 ? sim : ops::add(total, sim);
      ++pairs;
    }
  }
  return pairs == 1 ? total : ops::affine(total, 1.0 / static_cast<double>(pairs), 0.0);
}

Var reconstruction_loss(const Var& x, std::span<const Var> reconstructions) {
  if (reconstructions.empty()) throw ContractError("reconstruction_loss: no reconstructions");
  Var total = ops::mse(x, reconstructions[0]);
  for (std::size_t h = 1; h < reconstructions.size(); ++h) {
    total = ops::add(total, ops::mse(x, reconstructions[h]));
  }
  return total;
}

ForwardGraph build_forward(const BoundParams& params, const Var& x, const ModelConfig& config) {
  Reconstruction rec = reconstruct(params, x, config);
  ForwardGraph g;
  g.loss_r = reconstruction_loss(x, rec.reconstructions);
  if (config.uses_disentangling_loss()) {
    g.loss_d = disentangling_loss(x.tape(), rec.maps);
    g.loss_overall = ops::add(g.loss_d, g.loss_r);
  } else {
    g.loss_d = x.tape().constant(Tensor::scalar(0.0));
    g.loss_overall = g.loss_r;
  }
  g.maps = std::move(rec.maps);
  g.reconstructions = std::move(rec.reconstructions);
  return g;
}

ForwardArtifacts ForwardArtifacts::from_graph(const ForwardGraph& graph) {
  ForwardArtifacts a;
  for (const Var& m : graph.maps) a.attention_maps.push_back(m.value());
  for (const Var& r : graph.reconstructions) a.reconstructions.push_back(r.value());
  a.loss_d = graph.loss_d.value().item();
  a.loss_r = graph.loss_r.value().item();
  a.loss_overall = graph.loss_overall.value().item();
  return a;
}

ForwardArtifacts forward_batch(const ModelParams& params, const ModelConfig& config,
                               const Tensor& x) {
  Tape tape;
  const BoundParams bound = BoundParams::borrow(tape, params);
  const Tensor batch = as_batch(x, config);
  return ForwardArtifacts::from_graph(build_forward(bound, tape.borrow(batch), config));
}

Tensor encode(const ModelParams& params, const ModelConfig& config, const Tensor& x) {
  Tape tape;
  const BoundParams bound = BoundParams::borrow(tape, params);
  const Tensor batch = as_batch(x, config);
  check_input(batch.shape(), config);
  Tensor z = encode(bound, tape.borrow(batch), config.leaky_slope).value();
  if (x.rank() == 3) return z;
  return z.reshaped(Shape{z.dim(1), z.dim(2)});
}

std::pair<Tensor, Tensor> attention_head(const ModelParams& params, const Tensor& z,
                                         std::size_t head) {
  Tape tape;
  const BoundParams bound = BoundParams::borrow(tape, params);
  const Tensor batch = z.rank() == 2 ? z.reshaped(Shape{1, z.dim(0), z.dim(1)}) : z;
  const HeadOutput out = attention_head(bound, tape.borrow(batch), head);
  if (z.rank() == 3) return {out.weights.value(), out.features.value()};
  const std::size_t m = z.dim(0);
  return {out.weights.value().reshaped(Shape{m, m}),
          out.features.value().reshaped(Shape{m, z.dim(1)})};
}

std::vector<double> reconstruction_scores(const Tensor& x,
                                          std::span<const Tensor> reconstructions) {
  const std::size_t n = x.dim(0);
  const std::size_t per = x.size() / n;
  std::vector<double> scores(n, 0.0);
  for (const Tensor& r : reconstructions) {
    if (!(r.shape() == x.shape())) {
      throw DimensionError("reconstruction_scores: shape " + r.shape().str() + " vs " +
                           x.shape().str());
    }
    for (std::size_t s = 0; s < n; ++s) {
      double total = 0.0;
      for (std::size_t e = s * per; e < (s + 1) * per; ++e) {
        const double d = x[e] - r[e];
        total += d * d;
      }
      scores[s] += total;
    }
  }
  return scores;
}

std::vector<double> anomaly_scores(const ModelParams& params, const ModelConfig& config,
                                   const Tensor& x, std::size_t chunk) {
  const Tensor all = as_batch(x, config);
  const std::size_t n = all.dim(0);
  const std::size_t per = all.size() / n;
  chunk = std::max<std::size_t>(chunk, 1);

  std::vector<double> scores;
  scores.reserve(n);
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    const std::size_t count = std::min(chunk, n - begin);
    Tensor batch(Shape{count, all.dim(1), all.dim(2)});
    std::memcpy(batch.data(), all.data() + begin * per, count * per * sizeof(double));

    Tape tape;
    const BoundParams bound = BoundParams::borrow(tape, params);
    const Reconstruction rec = reconstruct(bound, tape.borrow(batch), config);
    std::vector<Tensor> recons;
    for (const Var& r : rec.reconstructions) recons.push_back(r.value());
    const auto part = reconstruction_scores(batch, recons);
    scores.insert(scores.end(), part.begin(), part.end());
  }
  return scores;
}

double anomaly_score(const ModelParams& params, const ModelConfig& config, const Tensor& sample) {
  return anomaly_scores(params, config, as_batch(sample, config), 1).front();
}

}  // namespace disent::model
