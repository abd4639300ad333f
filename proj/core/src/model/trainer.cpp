#include "disent/model/trainer.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

#include "disent/numerics/adam.hpp"
#include "disent/numerics/errors.hpp"
#include "disent/numerics/random.hpp"

namespace disent::model {
namespace {

Tensor gather(const Tensor& data, std::span<const std::size_t> rows) {
  const std::size_t per = data.size() / data.dim(0);
  Tensor batch(Shape{rows.size(), data.dim(1), data.dim(2)});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::memcpy(batch.data() + i * per, data.data() + rows[i] * per, per * sizeof(double));
  }
  return batch;
}

}  // namespace

FitResult fit(const ModelConfig& config, const Tensor& train, const StepObserver& observer) {
  config.require_valid();
  const Shape& s = train.shape();
  if (s.rank() != 3 || s[1] != config.num_attributes || s[2] != config.channels_in) {
    throw DimensionError("fit: training data must be [N x " +
                         std::to_string(config.num_attributes) + " x " +
                         std::to_string(config.channels_in) + "], got " + s.str());
  }

  FitResult result{init_params(config), {}};
  ModelParams& params = result.params;
  const std::vector<Tensor*> tensors = params.tensors();
  for (Tensor* t : tensors) t->set_requires_grad(true);
  AdamState adam = AdamState::for_parameters(tensors, {.learning_rate = config.learning_rate});

  const std::size_t n = s[0];
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle_rng(derive_seed(config.seed, 1));

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    EpochLosses totals{epoch, 0.0, 0.0, 0.0};
    std::size_t step = 0;
    for (std::size_t begin = 0; begin < n; begin += config.batch_size, ++step) {
      const std::size_t count = std::min(config.batch_size, n - begin);
      const Tensor batch = gather(train, std::span(order).subspan(begin, count));
      try {
        Tape tape;
        const BoundParams bound = BoundParams::watch(tape, params);
        const ForwardGraph graph = build_forward(bound, tape.borrow(batch), config);
        tape.backward(graph.loss_overall);
        const double w = static_cast<double>(count);
        totals.loss_d += w * graph.loss_d.value().item();
        totals.loss_r += w * graph.loss_r.value().item();
        totals.loss_overall += w * graph.loss_overall.value().item();
        adam_step(tensors, adam);
        if (observer) observer(epoch, step, ForwardArtifacts::from_graph(graph));
      } catch (const NonFiniteError& e) {
        throw NonFiniteError("training diverged at epoch " + std::to_string(epoch) + ", step " +
                             std::to_string(step) + ": " + e.what());
      }
      ++result.trace.steps;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    totals.loss_d *= inv_n;
    totals.loss_r *= inv_n;
    totals.loss_overall *= inv_n;
    result.trace.epochs.push_back(totals);
  }

  for (Tensor* t : tensors) t->set_requires_grad(false);
  return result;
}

}  // namespace disent::model
