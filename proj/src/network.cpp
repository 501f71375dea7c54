#include "pwsurv/network.hpp"

#include <cmath>
#include <string>

#include "pwsurv/error.hpp"
#include "pwsurv/rng.hpp"

namespace pwsurv {

std::string_view to_string(Activation a) {
  return a == Activation::ReLU ? "relu" : "tanh";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "tanh") return Activation::Tanh;
  throw InvalidArgument("unknown activation '" + std::string(name) + "' (expected relu or tanh)");
}

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

bool NetworkParams::all_finite() const {
  for (const auto& l : layers) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

std::vector<double> NetworkParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers) {
    flat.insert(flat.end(), l.weight.data(), l.weight.data() + l.weight.size());
    flat.insert(flat.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return flat;
}

void NetworkParams::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw DimensionMismatch("flat parameter vector has " + std::to_string(flat.size()) +
                            " entries, network has " + std::to_string(parameter_count()));
  }
  std::size_t pos = 0;
  for (auto& l : layers) {
    std::copy_n(flat.begin() + pos, l.weight.size(), l.weight.data());
    pos += l.weight.size();
    std::copy_n(flat.begin() + pos, l.bias.size(), l.bias.data());
    pos += l.bias.size();
  }
}

NetworkParams NetworkParams::zeros_like() const {
  NetworkParams z;
  z.activation = activation;
  z.layers.reserve(layers.size());
  for (const auto& l : layers) {
    z.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                        Eigen::VectorXd::Zero(l.bias.size())});
  }
  return z;
}

NetworkParams init_params(const NetworkConfig& config) {
  if (config.input_dim == 0 || config.output_dim == 0) {
    throw InvalidArgument("network input and output dimensions must be positive");
  }
  std::vector<std::size_t> widths{config.input_dim};
  for (std::size_t h : config.hidden_layers) {
    if (h == 0) throw InvalidArgument("hidden layer width must be positive");
    widths.push_back(h);
  }
  widths.push_back(config.output_dim);

  Rng rng(config.seed);
  NetworkParams p;
  p.activation = config.activation;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const auto fan_in = static_cast<Eigen::Index>(widths[i]);
    const auto fan_out = static_cast<Eigen::Index>(widths[i + 1]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    DenseLayer layer{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd::Zero(fan_out)};
    for (Eigen::Index c = 0; c < fan_in; ++c) {
      for (Eigen::Index r = 0; r < fan_out; ++r) layer.weight(r, c) = rng.uniform(-bound, bound);
    }
    p.layers.push_back(std::move(layer));
  }
  return p;
}

namespace {

Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& pre) {
  if (a == Activation::ReLU) return pre.cwiseMax(0.0);
  return pre.array().tanh().matrix();
}

// d(act)/d(pre) applied to an upstream gradient.
Eigen::MatrixXd activate_backward(Activation a, const Eigen::MatrixXd& pre,
                                  const Eigen::MatrixXd& upstream) {
  if (a == Activation::ReLU) {
    return (pre.array() > 0.0).select(upstream, 0.0);
  }
  const Eigen::ArrayXXd th = pre.array().tanh();
  return (upstream.array() * (1.0 - th * th)).matrix();
}

}  // namespace

Eigen::MatrixXd forward(const NetworkParams& params, const Eigen::MatrixXd& x,
                        ForwardCache* cache) {
  if (x.rows() != static_cast<Eigen::Index>(params.input_dim())) {
    throw DimensionMismatch("network expects " + std::to_string(params.input_dim()) +
                            " inputs, got " + std::to_string(x.rows()));
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Eigen::MatrixXd h = x;
  const std::size_t n_layers = params.layers.size();
  for (std::size_t i = 0; i < n_layers; ++i) {
    const auto& l = params.layers[i];
    Eigen::MatrixXd pre = l.weight * h;
    pre.colwise() += l.bias;
    if (cache) cache->inputs.push_back(std::move(h));
    if (i + 1 == n_layers) {
      if (cache) cache->pre.push_back(pre);
      return pre;
    }
    h = activate(params.activation, pre);
    if (cache) cache->pre.push_back(std::move(pre));
  }
  return h;
}

std::vector<double> forward(const NetworkParams& params, std::span<const double> x) {
  const Eigen::Map<const Eigen::VectorXd> col(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::MatrixXd z = forward(params, Eigen::MatrixXd(col));
  return {z.data(), z.data() + z.size()};
}

NetworkGrads backward(const NetworkParams& params, const ForwardCache& cache,
                      const Eigen::MatrixXd& grad_z) {
  const std::size_t n_layers = params.layers.size();
  if (cache.inputs.size() != n_layers || cache.pre.size() != n_layers) {
    throw DimensionMismatch("forward cache does not match network depth");
  }
  if (grad_z.rows() != static_cast<Eigen::Index>(params.output_dim()) ||
      grad_z.cols() != cache.inputs.front().cols()) {
    throw DimensionMismatch("output gradient shape does not match cached forward pass");
  }
  NetworkGrads g;
  g.activation = params.activation;
  g.layers.resize(n_layers);
  Eigen::MatrixXd delta = grad_z;  // d(loss)/d(pre) of the current layer
  for (std::size_t i = n_layers; i-- > 0;) {
    g.layers[i].weight = delta * cache.inputs[i].transpose();
    g.layers[i].bias = delta.rowwise().sum();
    if (i > 0) {
      const Eigen::MatrixXd upstream = params.layers[i].weight.transpose() * delta;
      delta = activate_backward(params.activation, cache.pre[i - 1], upstream);
    }
  }
  return g;
}

}  // namespace pwsurv
