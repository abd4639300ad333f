#include "disent/model/params.hpp"

#include <cmath>
#include <cstring>

#include "disent/numerics/random.hpp"

namespace disent::model {
namespace {

LinearParams zero_linear(std::size_t in, std::size_t out) {
  return {Tensor(Shape{in, out}), Tensor(Shape{out})};
}

template <typename Params, typename Out>
void collect(Params& p, Out& out) {
  auto add = [&out](auto& lin) {
    out.push_back(&lin.weight);
    out.push_back(&lin.bias);
  };
  for (auto& lin : p.encoder) add(lin);
  for (auto& head : p.heads) {
    add(head.query);
    add(head.key);
    add(head.value);
  }
  for (auto& lin : p.decoder) add(lin);
}

}  // namespace

std::vector<Tensor*> ModelParams::tensors() {
  std::vector<Tensor*> out;
  collect(*this, out);
  return out;
}

std::vector<const Tensor*> ModelParams::tensors() const {
  std::vector<const Tensor*> out;
  collect(*this, out);
  return out;
}

std::vector<std::string> ModelParams::tensor_names() const {
  std::vector<std::string> names;
  auto add = [&names](const std::string& prefix) {
    names.push_back(prefix + ".weight");
    names.push_back(prefix + ".bias");
  };
  for (std::size_t i = 0; i < encoder.size(); ++i) add("encoder." + std::to_string(i));
  for (std::size_t h = 0; h < heads.size(); ++h) {
    const std::string prefix = "head." + std::to_string(h);
    add(prefix + ".query");
    add(prefix + ".key");
    add(prefix + ".value");
  }
  for (std::size_t i = 0; i < decoder.size(); ++i) add("decoder." + std::to_string(i));
  return names;
}

void ModelParams::zero_grad() {
  for (Tensor* t : tensors()) t->zero_grad();
}

ModelParams zero_params(const ModelConfig& config) {
  const std::size_t c = config.latent_channels;
  const std::size_t in = config.channels_in;
  ModelParams p;
  p.encoder = {zero_linear(in, c), zero_linear(c, c), zero_linear(c, c)};
  p.heads.reserve(config.num_heads);
  for (std::size_t h = 0; h < config.num_heads; ++h) {
    p.heads.push_back({zero_linear(c, c), zero_linear(c, c), zero_linear(c, c)});
  }
  p.decoder = {zero_linear(c, c), zero_linear(c, c), zero_linear(c, in)};
  return p;
}

ModelParams init_params(const ModelConfig& config) {
  config.require_valid();
  ModelParams p = zero_params(config);
  Rng rng(derive_seed(config.seed, 0));
  for (Tensor* t : p.tensors()) {
    if (t->rank() != 2) continue;  // biases stay zero
    const double bound = 1.0 / std::sqrt(static_cast<double>(t->dim(0)));
    for (double& w : t->values()) w = rng.uniform(-bound, bound);
  }
  return p;
}

bool bitwise_equal(const ModelParams& a, const ModelParams& b) {
  const auto ta = a.tensors();
  const auto tb = b.tensors();
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (!(ta[i]->shape() == tb[i]->shape())) return false;
    if (std::memcmp(ta[i]->data(), tb[i]->data(), ta[i]->size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace disent::model
