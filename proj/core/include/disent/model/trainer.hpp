#pragma once

#include <functional>
#include <vector>

#include "disent/model/config.hpp"
#include "disent/model/network.hpp"
#include "disent/model/params.hpp"

namespace disent::model {

// Sample-weighted means of the batch losses over one epoch.
struct EpochLosses {
  std::size_t epoch = 0;
  double loss_d = 0.0;
  double loss_r = 0.0;
  double loss_overall = 0.0;
};

struct TrainingTrace {
  std::vector<EpochLosses> epochs;
  std::size_t steps = 0;
};

struct FitResult {
  ModelParams params;
  TrainingTrace trace;
};

// Called after every optimizer step with the forward pass that produced it.
using StepObserver =
    std::function<void(std::size_t epoch, std::size_t step, const ForwardArtifacts& artifacts)>;

// Trains from init_params(config) on `train` ([N x M x channels_in]) for
// config.epochs epochs of ceil(N / batch_size) Adam steps, reshuffling each
// epoch from a stream seeded by config.seed. Throws NonFiniteError with the
// epoch/step location if the loss or weights diverge.
FitResult fit(const ModelConfig& config, const Tensor& train, const StepObserver& observer = {});

}  // namespace disent::model
