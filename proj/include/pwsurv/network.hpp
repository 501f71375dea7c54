#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace pwsurv {

enum class Activation { ReLU, Tanh };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

struct NetworkConfig {
  std::size_t input_dim = 2;
  std::vector<std::size_t> hidden_layers{32, 32};
  std::size_t output_dim = 1;
  Activation activation = Activation::ReLU;
  std::uint64_t seed = 0;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// Weights of a fully connected network; the activation is applied after
/// every layer except the last. Gradients use the same type.
struct NetworkParams {
  std::vector<DenseLayer> layers;
  Activation activation = Activation::ReLU;

  std::size_t input_dim() const { return layers.front().weight.cols(); }
  std::size_t output_dim() const { return layers.back().weight.rows(); }
  std::size_t parameter_count() const;
  bool all_finite() const;

  /// Layer order, weight (column-major) then bias.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  /// Same shapes, all zeros.
  NetworkParams zeros_like() const;
};

using NetworkGrads = NetworkParams;

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
NetworkParams init_params(const NetworkConfig& config);

/// Activations recorded by a forward pass, consumed by backward.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
};

/// Batched forward pass: columns of `x` are covariate vectors. Returns the
/// output matrix (output_dim x batch). Throws DimensionMismatch on a wrong
/// input row count.
Eigen::MatrixXd forward(const NetworkParams& params, const Eigen::MatrixXd& x,
                        ForwardCache* cache = nullptr);

std::vector<double> forward(const NetworkParams& params, std::span<const double> x);

/// Reverse-mode pass. `grad_z` is d(loss)/d(output) with one column per
/// batch entry of the cached forward call; gradients are summed over the
/// batch.
NetworkGrads backward(const NetworkParams& params, const ForwardCache& cache,
                      const Eigen::MatrixXd& grad_z);

}  // namespace pwsurv
