#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pwsurv/grid.hpp"

namespace pwsurv {

/// The four piecewise parameterizations. Density heads model f directly and
/// reserve one extra output for the survival level at t_max; hazard heads
/// model h = exp(z) and get S from the cumulative hazard.
enum class HeadKind { ConstantDensity, LinearDensity, ConstantHazard, LinearHazard };

inline constexpr HeadKind kAllHeads[] = {HeadKind::ConstantDensity, HeadKind::ConstantHazard,
                                         HeadKind::LinearDensity, HeadKind::LinearHazard};

/// "constant-density", "linear-density", "constant-hazard", "linear-hazard".
std::string_view to_string(HeadKind kind);
/// Inverse of to_string; throws InvalidArgument on anything else.
HeadKind parse_head_kind(std::string_view name);

bool is_density_head(HeadKind kind);

/// Number of network outputs the head consumes on a grid with `segments`
/// segments: N+1, N+2, N and N+1 respectively.
std::size_t output_dim(HeadKind kind, std::size_t segments);

struct HeadEvaluation {
  double log_density = 0.0;
  double log_survival = 0.0;
  double hazard = 0.0;
  double cumulative_hazard = 0.0;

  double density() const { return std::exp(log_density); }
  double survival() const { return std::exp(log_survival); }
};

/// Everything about an evaluation at time t that does not depend on z.
///
/// Every head reduces to weighted sums of exp(z_i) with non-negative weights:
///   density heads   f = <rate, e^z> / <normalizer, e^z>,
///                   S = <remaining, e^z> / <normalizer, e^z>
///   hazard heads    h = <rate, e^z>,  H = <remaining, e^z>
/// where `remaining` is the probability mass beyond t (density heads) or the
/// exposure weights of H (hazard heads). Precomputing these per record makes
/// the training loop independent of grid lookups.
struct HeadWeights {
  HeadKind kind = HeadKind::ConstantDensity;
  std::vector<double> rate;
  std::vector<double> remaining;
  std::vector<double> normalizer;  // empty for hazard heads
  bool at_origin = false;          // t == 0: S is exactly 1

  std::size_t dim() const { return rate.size(); }
};

/// Throws DomainError when t is outside [0, t_max].
HeadWeights head_weights(HeadKind kind, const TimeGrid& grid, double t);

/// Throws DimensionMismatch if z.size() != w.dim().
HeadEvaluation evaluate(const HeadWeights& w, std::span<const double> z);

/// Same as above; also writes d(log f)/dz and d(log S)/dz (each of length
/// dim) into the two output spans.
HeadEvaluation evaluate(const HeadWeights& w, std::span<const double> z,
                        std::span<double> d_log_density, std::span<double> d_log_survival);

HeadEvaluation evaluate(HeadKind kind, std::span<const double> z, const TimeGrid& grid, double t);

// Per-head parameter maps.

/// f_0..f_{N-1} for z of length N+1; the last output sets S(t_max).
std::vector<double> density_levels_constant(std::span<const double> z, const TimeGrid& grid);
/// Node densities f_0..f_N for z of length N+2; z_{N+1} sets S(t_max).
std::vector<double> density_nodes_linear(std::span<const double> z, const TimeGrid& grid);
/// h_i = exp(z_i), z of length N.
std::vector<double> hazard_levels_constant(std::span<const double> z);
/// Node hazards h_0..h_N, z of length N+1.
std::vector<double> hazard_nodes_linear(std::span<const double> z);

HeadEvaluation eval_constant_density(std::span<const double> z, const TimeGrid& grid, double t);
HeadEvaluation eval_linear_density(std::span<const double> z, const TimeGrid& grid, double t);
HeadEvaluation eval_constant_hazard(std::span<const double> z, const TimeGrid& grid, double t);
HeadEvaluation eval_linear_hazard(std::span<const double> z, const TimeGrid& grid, double t);

}  // namespace pwsurv
