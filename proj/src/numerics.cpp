#include "pwsurv/numerics.hpp"

#include <cmath>
#include <limits>

#include "pwsurv/error.hpp"

namespace pwsurv {

double log_sum_exp(std::span<const double> values, std::span<const double> weights) {
  if (values.empty()) {
    throw InvalidArgument("log_sum_exp: empty input");
  }
  if (!weights.empty() && weights.size() != values.size()) {
    throw InvalidArgument("log_sum_exp: weights and values differ in length");
  }
  double max_v = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isnan(values[i])) {
      throw InvalidArgument("log_sum_exp: NaN input");
    }
    if (!weights.empty() && !(weights[i] > 0.0)) {
      throw InvalidArgument("log_sum_exp: weights must be strictly positive");
    }
    max_v = std::max(max_v, values[i]);
  }
  if (std::isinf(max_v)) {
    return max_v;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    sum += w * std::exp(values[i] - max_v);
  }
  return max_v + std::log(sum);
}

double log1m_exp(double a) {
  if (!(a < 0.0)) {
    throw DomainError("log1m_exp: argument must be negative");
  }
  // Maechler's switch point: expm1 is accurate near 0, log1p for large |a|.
  if (a > -M_LN2) {
    return std::log(-std::expm1(a));
  }
  return std::log1p(-std::exp(a));
}

double log_sum_exp_nonneg(std::span<const double> values, std::span<const double> weights,
                          std::span<double> softmax) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double max_v = kNegInf;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (weights[i] > 0.0 && values[i] > max_v) {
      max_v = values[i];
    }
  }
  if (max_v == kNegInf) {
    for (double& s : softmax) s = 0.0;
    return kNegInf;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double term = weights[i] > 0.0 ? weights[i] * std::exp(values[i] - max_v) : 0.0;
    if (!softmax.empty()) softmax[i] = term;
    sum += term;
  }
  if (!softmax.empty()) {
    for (double& s : softmax) s /= sum;
  }
  return max_v + std::log(sum);
}

}  // namespace pwsurv
