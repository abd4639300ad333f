#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "disent/model/checkpoint.hpp"
#include "disent/model/config.hpp"
#include "disent/model/network.hpp"
#include "disent/model/params.hpp"
#include "disent/model/trainer.hpp"
#include "disent/numerics/errors.hpp"
#include "disent/numerics/grad_check.hpp"
#include "disent/numerics/ops.hpp"
#include "support/oracles.hpp"

using namespace disent;
using namespace disent::model;
using disent::testing::naive_matmul;
using disent::testing::random_tensor;

namespace {

ModelConfig toy_config(std::size_t m = 4, std::size_t c = 8, std::size_t heads = 2) {
  ModelConfig config;
  config.num_attributes = m;
  config.channels_in = 1;
  config.latent_channels = c;
  config.num_heads = heads;
  config.epochs = 3;
  config.batch_size = 4;
  config.seed = 11;
  return config;
}

// Every parameter of `params` randomized, biases included, so gradient checks
// exercise all paths.
ModelParams random_params(const ModelConfig& config, std::mt19937_64& gen) {
  ModelParams p = zero_params(config);
  for (Tensor* t : p.tensors()) *t = random_tensor(t->shape(), gen, -0.8, 0.8);
  return p;
}

Tensor add_rows(const Tensor& m, const Tensor& bias) {
  Tensor out = m;
  for (std::size_t i = 0; i < m.dim(0); ++i) {
    for (std::size_t j = 0; j < m.dim(1); ++j) out.at(i, j) += bias[j];
  }
  return out;
}

std::vector<Tensor> flat(const ModelParams& p) {
  std::vector<Tensor> out;
  for (const Tensor* t : p.tensors()) out.push_back(*t);
  return out;
}

}  // namespace

TEST(ModelConfig, Validation) {
  ModelConfig c = toy_config();
  EXPECT_TRUE(c.validate().empty());
  c.ablation = Ablation::kComplementMask;
  EXPECT_FALSE(c.validate().empty());
  c.num_heads = 1;
  EXPECT_TRUE(c.validate().empty());
  EXPECT_EQ(c.num_maps(), 2u);

  ModelConfig three = toy_config(4, 8, 3);
  EXPECT_TRUE(three.validate().empty());
  three.ablation = Ablation::kNoDisentangle;
  EXPECT_THROW(three.require_valid(), ContractError);

  EXPECT_EQ(parse_ablation("one_head_one_subset"), Ablation::kOneHeadOneSubset);
  EXPECT_FALSE(parse_ablation("nope").has_value());
}

TEST(InitParams, DeterministicPerSeed) {
  ModelConfig c = toy_config();
  EXPECT_TRUE(bitwise_equal(init_params(c), init_params(c)));
  ModelConfig other = c;
  other.seed = c.seed + 1;
  EXPECT_FALSE(bitwise_equal(init_params(c), init_params(other)));
}

TEST(InitParams, LayerShapes) {
  ModelConfig c = toy_config(6, 128, 2);
  const ModelParams p = init_params(c);
  EXPECT_EQ(p.encoder[0].weight.shape(), (Shape{1, 128}));
  EXPECT_EQ(p.encoder[1].weight.shape(), (Shape{128, 128}));
  EXPECT_EQ(p.encoder[2].weight.shape(), (Shape{128, 128}));
  EXPECT_EQ(p.decoder[0].weight.shape(), (Shape{128, 128}));
  EXPECT_EQ(p.decoder[1].weight.shape(), (Shape{128, 128}));
  EXPECT_EQ(p.decoder[2].weight.shape(), (Shape{128, 1}));
  ASSERT_EQ(p.heads.size(), 2u);
  EXPECT_EQ(p.heads[1].value.weight.shape(), (Shape{128, 128}));
  for (const auto& layer : p.encoder) {
    for (double b : layer.bias.values()) EXPECT_EQ(b, 0.0);
  }
  // U(-1/sqrt(fan_in), 1/sqrt(fan_in))
  for (double w : p.encoder[1].weight.values()) EXPECT_LE(std::abs(w), 1.0 / std::sqrt(128.0));
}

TEST(Encode, ZeroParametersGiveZero) {
  ModelConfig c = toy_config(6, 128, 2);
  const Tensor z = encode(zero_params(c), c, Tensor(Shape{1, 6, 1}, 0.7));
  EXPECT_EQ(z.shape(), (Shape{1, 6, 128}));
  for (double v : z.values()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(encode(zero_params(c), c, Tensor(Shape{1, 5, 1})), DimensionError);
}

TEST(Encode, GradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(21);
  ModelConfig c = toy_config(4, 5, 2);
  const ModelParams p = random_params(c, gen);
  const Tensor target = random_tensor(Shape{2, 4, 5}, gen);
  std::vector<Tensor> inputs = flat(p);
  inputs.push_back(random_tensor(Shape{2, 4, 1}, gen));
  const auto r = grad_check(
      [&](Tape& tape, const std::vector<Var>& v) {
        const BoundParams bound = BoundParams::from_vars(std::span(v).first(v.size() - 1), 2);
        return ops::mse(encode(bound, v.back(), c.leaky_slope), tape.borrow(target));
      },
      inputs);
  EXPECT_LE(r.max_relative_error, 1e-4);
}

TEST(AttentionHead, ZeroProjectionsAreUniform) {
  ModelConfig c = toy_config(6, 8, 2);
  std::mt19937_64 gen(22);
  const auto [w, zhat] = attention_head(zero_params(c), random_tensor(Shape{6, 8}, gen), 1);
  EXPECT_EQ(w.shape(), (Shape{6, 6}));
  for (double v : w.values()) EXPECT_NEAR(v, 1.0 / 6.0, 1e-15);
  for (double v : zhat.values()) EXPECT_EQ(v, 0.0);
}

TEST(AttentionHead, MatchesDirectRecomputation) {
  std::mt19937_64 gen(23);
  ModelConfig c = toy_config(5, 7, 2);
  const ModelParams p = random_params(c, gen);
  const Tensor z = random_tensor(Shape{5, 7}, gen);
  const HeadParams& h = p.heads[1];
  const Tensor q = add_rows(naive_matmul(z, h.query.weight), h.query.bias);
  const Tensor k = add_rows(naive_matmul(z, h.key.weight), h.key.bias);
  const Tensor v = add_rows(naive_matmul(z, h.value.weight), h.value.bias);

  Tensor w(Shape{5, 5});
  for (std::size_t i = 0; i < 5; ++i) {
    double denom = 0.0;
    for (std::size_t j = 0; j < 5; ++j) {
      double dot = 0.0;
      for (std::size_t d = 0; d < 7; ++d) dot += q.at(i, d) * k.at(j, d);
      w.at(i, j) = std::exp(dot / std::sqrt(7.0));
      denom += w.at(i, j);
    }
    for (std::size_t j = 0; j < 5; ++j) w.at(i, j) /= denom;
  }
  const Tensor want_zhat = naive_matmul(w, v);

  const auto [got_w, got_zhat] = attention_head(p, z, 1);
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(got_w[i], w[i], 1e-13);
  for (std::size_t i = 0; i < want_zhat.size(); ++i) EXPECT_NEAR(got_zhat[i], want_zhat[i], 1e-12);
}

TEST(DisentanglingLoss, Examples) {
  Tape tape;
  const Tensor eye = Tensor::identity(2);
  const Tensor swap = Tensor::matrix({{0, 1}, {1, 0}});
  const Tensor uniform = Tensor::matrix({{0.5, 0.5}, {0.5, 0.5}});
  const Tensor other = Tensor::matrix({{0.2, 0.8}, {0.6, 0.4}});

  std::vector<Var> same{tape.borrow(other), tape.borrow(other)};
  EXPECT_NEAR(disentangling_loss(tape, same).value().item(), 1.0, 1e-15);
  std::vector<Var> disjoint{tape.borrow(eye), tape.borrow(swap)};
  EXPECT_EQ(disentangling_loss(tape, disjoint).value().item(), 0.0);
  std::vector<Var> flat_maps{tape.borrow(uniform), tape.borrow(uniform)};
  EXPECT_NEAR(disentangling_loss(tape, flat_maps).value().item(), 1.0, 1e-15);
  std::vector<Var> single{tape.borrow(other)};
  EXPECT_EQ(disentangling_loss(tape, single).value().item(), 0.0);
}

TEST(DisentanglingLoss, AveragesHeadPairsAndBatch) {
  std::mt19937_64 gen(24);
  Tape tape;
  std::vector<Tensor> maps;
  for (int h = 0; h < 3; ++h) maps.push_back(random_tensor(Shape{2, 3, 3}, gen, 0.0, 1.0));
  std::vector<Var> vars;
  for (const Tensor& m : maps) vars.push_back(tape.borrow(m));

  auto cosine = [](const double* a, const double* b, std::size_t n) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      ab += a[i] * b[i];
      aa += a[i] * a[i];
      bb += b[i] * b[i];
    }
    return ab / std::sqrt(aa * bb);
  };
  double want = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      for (int s = 0; s < 2; ++s) want += cosine(maps[i].data() + 9 * s, maps[j].data() + 9 * s, 9);
    }
  }
  want /= 3.0 * 2.0;
  EXPECT_NEAR(disentangling_loss(tape, vars).value().item(), want, 1e-14);
}

TEST(ReconstructionLoss, Examples) {
  std::mt19937_64 gen(25);
  Tape tape;
  const Tensor x = random_tensor(Shape{3, 4, 1}, gen);
  std::vector<Var> exact{tape.borrow(x), tape.borrow(x)};
  EXPECT_EQ(reconstruction_loss(tape.borrow(x), exact).value().item(), 0.0);

  Tensor shifted = x;
  for (double& v : shifted.values()) v += 1.0;
  std::vector<Var> one{tape.borrow(shifted)};
  EXPECT_NEAR(reconstruction_loss(tape.borrow(x), one).value().item(), 1.0, 1e-15);

  const Tensor r1 = random_tensor(x.shape(), gen), r2 = random_tensor(x.shape(), gen);
  std::vector<Var> two{tape.borrow(r1), tape.borrow(r2)};
  const double want = ops::mse(tape.borrow(x), tape.borrow(r1)).value().item() +
                      ops::mse(tape.borrow(x), tape.borrow(r2)).value().item();
  EXPECT_NEAR(reconstruction_loss(tape.borrow(x), two).value().item(), want, 1e-15);
}

TEST(ForwardBatch, StructuralInvariants) {
  std::mt19937_64 gen(26);
  for (Ablation a : {Ablation::kFull, Ablation::kNoDisentangle, Ablation::kOneHeadOneSubset,
                     Ablation::kComplementMask}) {
    ModelConfig c = toy_config(5, 6, 2);
    c.ablation = a;
    if (a == Ablation::kOneHeadOneSubset || a == Ablation::kComplementMask) c.num_heads = 1;
    const ModelParams p = random_params(c, gen);
    const ForwardArtifacts out = forward_batch(p, c, random_tensor(Shape{3, 5, 1}, gen));
    ASSERT_EQ(out.attention_maps.size(), c.num_maps());
    ASSERT_EQ(out.reconstructions.size(), c.num_maps());
    for (std::size_t h = 0; h < out.attention_maps.size(); ++h) {
      const Tensor& w = out.attention_maps[h];
      // the complement of a stochastic row sums to M - 1
      const double want = (a == Ablation::kComplementMask && h == 1) ? 4.0 : 1.0;
      for (std::size_t row = 0; row < 15; ++row) {
        double total = 0.0;
        for (std::size_t j = 0; j < 5; ++j) total += w[row * 5 + j];
        EXPECT_NEAR(total, want, 1e-5);
      }
    }
    EXPECT_GE(out.loss_d, 0.0);
    EXPECT_LE(out.loss_d, 1.0);
    EXPECT_GE(out.loss_r, 0.0);
    EXPECT_NEAR(out.loss_overall, out.loss_d + out.loss_r, 1e-6);
    if (a != Ablation::kFull) {
      EXPECT_EQ(out.loss_d, 0.0);
      EXPECT_EQ(out.loss_overall, out.loss_r);
    }
    if (a == Ablation::kComplementMask) {
      for (std::size_t i = 0; i < out.attention_maps[0].size(); ++i) {
        EXPECT_DOUBLE_EQ(out.attention_maps[1][i], 1.0 - out.attention_maps[0][i]);
      }
    }
  }
}

TEST(ForwardBatch, FullLossGradientMatchesFiniteDifferences) {
  for (const auto& [m, heads, ablation] :
       {std::tuple{4u, 2u, Ablation::kFull}, std::tuple{6u, 3u, Ablation::kFull},
        std::tuple{4u, 1u, Ablation::kComplementMask}}) {
    std::mt19937_64 gen(27 + m + heads);
    ModelConfig c = toy_config(m, 8, heads);
    c.ablation = ablation;
    std::vector<Tensor> inputs = flat(random_params(c, gen));
    inputs.push_back(random_tensor(Shape{3, m, 1}, gen));
    const auto r = grad_check(
        [&](Tape&, const std::vector<Var>& v) {
          const BoundParams bound = BoundParams::from_vars(std::span(v).first(v.size() - 1), heads);
          return build_forward(bound, v.back(), c).loss_overall;
        },
        inputs);
    EXPECT_LE(r.max_relative_error, 1e-4) << "M=" << m << " H=" << heads << " input " << r.worst_input;
  }
}

TEST(AnomalyScore, SumsSquaredErrorOverHeads) {
  std::mt19937_64 gen(28);
  const Tensor x = random_tensor(Shape{1, 6, 1}, gen);
  const std::vector<Tensor> exact{x, x};
  EXPECT_EQ(reconstruction_scores(x, exact).front(), 0.0);
  Tensor shifted = x;
  for (double& v : shifted.values()) v += 1.0;
  const std::vector<Tensor> off{shifted, shifted};
  EXPECT_NEAR(reconstruction_scores(x, off).front(), 12.0, 1e-12);
}

TEST(AnomalyScore, HeadOrderDoesNotMatter) {
  std::mt19937_64 gen(29);
  ModelConfig c = toy_config(5, 6, 2);
  const ModelParams p = random_params(c, gen);
  ModelParams swapped = p;
  std::swap(swapped.heads[0], swapped.heads[1]);
  const Tensor x = random_tensor(Shape{7, 5, 1}, gen);
  const auto a = anomaly_scores(p, c, x, 3);
  const auto b = anomaly_scores(swapped, c, x);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i], b[i], 1e-12 * std::max(1.0, a[i]));
    EXPECT_GE(a[i], 0.0);
  }
  EXPECT_NEAR(anomaly_score(p, c, Tensor(Shape{5, 1}, std::vector<double>(x.data(), x.data() + 5))), a[0],
              1e-12 * std::max(1.0, a[0]));
}

TEST(Fit, ZeroEpochsReturnsInitialization) {
  std::mt19937_64 gen(30);
  ModelConfig c = toy_config();
  c.epochs = 0;
  const FitResult r = fit(c, random_tensor(Shape{10, 4, 1}, gen));
  EXPECT_TRUE(bitwise_equal(r.params, init_params(c)));
  EXPECT_TRUE(r.trace.epochs.empty());
}

TEST(Fit, DeterministicWithTraceAndObserver) {
  std::mt19937_64 gen(31);
  ModelConfig c = toy_config();
  const Tensor train = random_tensor(Shape{10, 4, 1}, gen);
  std::size_t calls = 0;
  const FitResult a = fit(c, train, [&](std::size_t, std::size_t, const ForwardArtifacts& f) {
    ++calls;
    EXPECT_NEAR(f.loss_overall, f.loss_d + f.loss_r, 1e-6);
  });
  const FitResult b = fit(c, train);
  EXPECT_TRUE(bitwise_equal(a.params, b.params));
  EXPECT_EQ(a.trace.epochs.size(), 3u);
  EXPECT_EQ(a.trace.steps, 3u * 3u);  // ceil(10 / 4) steps per epoch
  EXPECT_EQ(calls, a.trace.steps);
  for (const auto& e : a.trace.epochs) EXPECT_NEAR(e.loss_overall, e.loss_d + e.loss_r, 1e-12);
}

TEST(Fit, ReducesLossOnCorrelatedData) {
  // Two attribute groups, each a noisy copy of one latent factor.
  std::mt19937_64 gen(32);
  std::normal_distribution<double> n(0.0, 1.0);
  Tensor train(Shape{64, 4, 1});
  for (std::size_t s = 0; s < 64; ++s) {
    const double a = n(gen), b = n(gen);
    train.at(s, 0, 0) = a;
    train.at(s, 1, 0) = a + 0.1 * n(gen);
    train.at(s, 2, 0) = b;
    train.at(s, 3, 0) = b + 0.1 * n(gen);
  }
  ModelConfig c = toy_config(4, 16, 2);
  c.epochs = 40;
  c.batch_size = 16;
  c.learning_rate = 1e-3;
  const FitResult r = fit(c, train);
  EXPECT_LT(r.trace.epochs.back().loss_overall, r.trace.epochs.front().loss_overall);
}

TEST(Fit, RejectsMismatchedInput) {
  ModelConfig c = toy_config();
  EXPECT_THROW(fit(c, Tensor(Shape{5, 3, 1})), DimensionError);
}

TEST(Checkpoint, RoundTripsBitExactly) {
  std::mt19937_64 gen(33);
  Checkpoint ck;
  ck.config = toy_config(5, 6, 3);
  ck.config.learning_rate = 0.1;  // not exactly representable
  ck.config.ablation = Ablation::kFull;
  ck.params = random_params(ck.config, gen);
  ck.params.encoder[0].weight[0] = 1.0 / 3.0;
  ck.params.encoder[0].weight[1] = -0.0;
  ck.params.encoder[0].weight[2] = 5e-324;
  ck.metadata["dataset"] = "breastw";
  ck.metadata["note"] = "two words";
  ck.extra_tensors.emplace("norm.location", random_tensor(Shape{5}, gen));

  std::stringstream buffer;
  write_checkpoint(buffer, ck);
  const Checkpoint back = read_checkpoint(buffer);
  EXPECT_TRUE(bitwise_equal(ck.params, back.params));
  EXPECT_EQ(back.config.learning_rate, 0.1);
  EXPECT_EQ(back.config.num_heads, 3u);
  EXPECT_EQ(back.config.seed, ck.config.seed);
  EXPECT_EQ(back.metadata, ck.metadata);
  ASSERT_TRUE(back.extra_tensors.contains("norm.location"));
  const Tensor& loc = back.extra_tensors.at("norm.location");
  EXPECT_EQ(std::memcmp(loc.data(), ck.extra_tensors.at("norm.location").data(), 5 * sizeof(double)), 0);
  EXPECT_TRUE(std::signbit(back.params.encoder[0].weight[1]));
}

TEST(Checkpoint, MalformedInputNamesTheLine) {
  std::stringstream bad("disent-checkpoint 1\nconfig num_heads two\nend\n");
  try {
    read_checkpoint(bad);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  std::stringstream wrong_version("disent-checkpoint 9\nend\n");
  EXPECT_THROW(read_checkpoint(wrong_version), ParseError);
  std::stringstream truncated("disent-checkpoint 1\n");
  EXPECT_THROW(read_checkpoint(truncated), ParseError);
}
