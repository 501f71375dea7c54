#include "pwsurv/optimizer.hpp"

#include <cmath>
#include <string>

#include "pwsurv/error.hpp"

namespace pwsurv {

OptimizerState make_optimizer(const NetworkParams& params, const AdamConfig& config) {
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
    throw InvalidArgument("learning rate must be finite and non-negative");
  }
  if (!(config.beta1 >= 0.0 && config.beta1 < 1.0) || !(config.beta2 >= 0.0 && config.beta2 < 1.0)) {
    throw InvalidArgument("moment decay rates must lie in [0, 1)");
  }
  if (!(config.epsilon > 0.0)) {
    throw InvalidArgument("epsilon must be positive");
  }
  return OptimizerState{config, params.zeros_like(), params.zeros_like(), 0};
}

namespace {

template <typename Block>
void adam_update(Block& param, const Block& grad, Block& m, Block& v, const AdamConfig& c,
                 double corr1, double corr2) {
  m = c.beta1 * m + (1.0 - c.beta1) * grad;
  v = c.beta2 * v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
  param.array() -= c.learning_rate * (m.array() / corr1) /
                   ((v.array() / corr2).sqrt() + c.epsilon);
}

}  // namespace

void optimizer_step(NetworkParams& params, const NetworkGrads& grads, OptimizerState& state) {
  const std::size_t n = params.layers.size();
  if (grads.layers.size() != n || state.first_moment.layers.size() != n) {
    throw DimensionMismatch("optimizer: layer count mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = params.layers[i];
    const auto& g = grads.layers[i];
    if (g.weight.rows() != p.weight.rows() || g.weight.cols() != p.weight.cols() ||
        g.bias.size() != p.bias.size()) {
      throw DimensionMismatch("optimizer: gradient shape mismatch in layer " + std::to_string(i));
    }
    if (!g.weight.allFinite() || !g.bias.allFinite()) {
      throw TrainingDiverged("non-finite gradient in layer " + std::to_string(i) + " at step " +
                             std::to_string(state.step + 1));
    }
  }
  ++state.step;
  const auto& c = state.config;
  const double corr1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double corr2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < n; ++i) {
    auto& p = params.layers[i];
    const auto& g = grads.layers[i];
    auto& m = state.first_moment.layers[i];
    auto& v = state.second_moment.layers[i];
    adam_update(p.weight, g.weight, m.weight, v.weight, c, corr1, corr2);
    adam_update(p.bias, g.bias, m.bias, v.bias, c, corr1, corr2);
  }
  if (!params.all_finite()) {
    throw TrainingDiverged("parameters became non-finite at step " + std::to_string(state.step));
  }
}

}  // namespace pwsurv
