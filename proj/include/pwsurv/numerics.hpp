#pragma once

#include <optional>
#include <span>

namespace pwsurv {

/// log(sum_i w_i * exp(values_i)), shifted by max(values) so nothing
/// overflows. Unit weights when `weights` is empty.
/// Throws InvalidArgument on empty or NaN input, a length mismatch, or a
/// weight that is not strictly positive.
double log_sum_exp(std::span<const double> values, std::span<const double> weights = {});

/// log(1 - exp(a)) for a < 0, accurate both near 0 and for very negative a.
/// Throws DomainError for a >= 0 or NaN.
double log1m_exp(double a);

/// Variant of log_sum_exp used on hot paths: weights may be zero (those terms
/// are skipped) and no validation is done. Returns -inf when every weight is
/// zero. If `softmax` is non-empty it receives w_i exp(v_i) / sum, which is
/// the gradient of the result with respect to `values`.
double log_sum_exp_nonneg(std::span<const double> values, std::span<const double> weights,
                          std::span<double> softmax = {});

}  // namespace pwsurv
