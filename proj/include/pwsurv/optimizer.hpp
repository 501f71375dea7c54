#pragma once

#include <cstdint>

#include "pwsurv/network.hpp"

namespace pwsurv {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adaptive-moment (Adam) state for one NetworkParams instance.
struct OptimizerState {
  AdamConfig config;
  NetworkParams first_moment;
  NetworkParams second_moment;
  std::uint64_t step = 0;
};

/// Zeroed moments shaped like `params`. Throws InvalidArgument for a
/// negative or non-finite learning rate or decay rates outside [0, 1).
OptimizerState make_optimizer(const NetworkParams& params, const AdamConfig& config);

/// One bias-corrected Adam update of `params`. Throws TrainingDiverged if a
/// gradient entry is NaN/inf or an updated parameter is not finite, and
/// DimensionMismatch if shapes disagree.
void optimizer_step(NetworkParams& params, const NetworkGrads& grads, OptimizerState& state);

}  // namespace pwsurv
