#include "pwsurv/heads.hpp"

#include <array>
#include <string>

#include "pwsurv/error.hpp"
#include "pwsurv/numerics.hpp"

namespace pwsurv {

namespace {

constexpr std::array<std::pair<HeadKind, std::string_view>, 4> kNames{{
    {HeadKind::ConstantDensity, "constant-density"},
    {HeadKind::LinearDensity, "linear-density"},
    {HeadKind::ConstantHazard, "constant-hazard"},
    {HeadKind::LinearHazard, "linear-hazard"},
}};

void check_dim(HeadKind kind, std::span<const double> z, std::size_t expected) {
  if (z.size() != expected) {
    throw DimensionMismatch(std::string(to_string(kind)) + " head expects " +
                            std::to_string(expected) + " outputs, got " + std::to_string(z.size()));
  }
}

// Stack storage for small heads, heap beyond that.
class Scratch {
 public:
  explicit Scratch(std::size_t n) : n_(n) {
    if (n > kInline) heap_.resize(n);
  }
  std::span<double> get() { return n_ > kInline ? std::span<double>(heap_) : std::span<double>(inline_.data(), n_); }

 private:
  static constexpr std::size_t kInline = 32;
  std::size_t n_;
  std::array<double, kInline> inline_{};
  std::vector<double> heap_;
};

// Mass of the linear interpolant on one segment, split between its two nodes.
void add_segment_mass(std::vector<double>& w, std::size_t seg, double width) {
  w[seg] += 0.5 * width;
  w[seg + 1] += 0.5 * width;
}

}  // namespace

std::string_view to_string(HeadKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

HeadKind parse_head_kind(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  throw InvalidArgument("unknown head kind '" + std::string(name) +
                        "' (expected constant-density, linear-density, constant-hazard or "
                        "linear-hazard)");
}

bool is_density_head(HeadKind kind) {
  return kind == HeadKind::ConstantDensity || kind == HeadKind::LinearDensity;
}

std::size_t output_dim(HeadKind kind, std::size_t segments) {
  switch (kind) {
    case HeadKind::ConstantDensity: return segments + 1;
    case HeadKind::LinearDensity: return segments + 2;
    case HeadKind::ConstantHazard: return segments;
    case HeadKind::LinearHazard: return segments + 1;
  }
  return 0;
}

HeadWeights head_weights(HeadKind kind, const TimeGrid& grid, double t) {
  const std::size_t n = grid.segments();
  const std::size_t k = grid.segment_index(t);
  const std::size_t dim = output_dim(kind, n);
  const double width = grid.width(k);
  const double elapsed = t - grid.point(k);           // time spent in segment k
  const double left = grid.point(k + 1) - t;          // time left in segment k
  const double frac = std::min(elapsed / width, 1.0);

  HeadWeights w;
  w.kind = kind;
  w.at_origin = (t == 0.0);
  w.rate.assign(dim, 0.0);
  w.remaining.assign(dim, 0.0);

  switch (kind) {
    case HeadKind::ConstantDensity: {
      w.normalizer.assign(dim, 0.0);
      for (std::size_t i = 0; i < n; ++i) w.normalizer[i] = grid.width(i);
      w.normalizer[n] = 1.0;
      w.rate[k] = 1.0;
      w.remaining[n] = 1.0;
      w.remaining[k] = left;
      for (std::size_t i = k + 1; i < n; ++i) w.remaining[i] = grid.width(i);
      break;
    }
    case HeadKind::LinearDensity: {
      w.normalizer.assign(dim, 0.0);
      for (std::size_t j = 0; j < n; ++j) add_segment_mass(w.normalizer, j, grid.width(j));
      w.normalizer[n + 1] = 1.0;
      w.rate[k] = 1.0 - frac;
      w.rate[k + 1] = frac;
      w.remaining[n + 1] = 1.0;
      // Integral over [t, tau_{k+1}] of the interpolant, per node.
      w.remaining[k] += left * left / (2.0 * width);
      w.remaining[k + 1] += left * (width + elapsed) / (2.0 * width);
      for (std::size_t j = k + 1; j < n; ++j) add_segment_mass(w.remaining, j, grid.width(j));
      break;
    }
    case HeadKind::ConstantHazard: {
      w.rate[k] = 1.0;
      for (std::size_t i = 0; i < k; ++i) w.remaining[i] = grid.width(i);
      w.remaining[k] = elapsed;
      break;
    }
    case HeadKind::LinearHazard: {
      w.rate[k] = 1.0 - frac;
      w.rate[k + 1] = frac;
      for (std::size_t j = 0; j < k; ++j) add_segment_mass(w.remaining, j, grid.width(j));
      // Integral over [tau_k, t] of the interpolant, per node.
      const double sq = elapsed * elapsed / (2.0 * width);
      w.remaining[k] += elapsed - sq;
      w.remaining[k + 1] += sq;
      break;
    }
  }
  return w;
}

HeadEvaluation evaluate(const HeadWeights& w, std::span<const double> z,
                        std::span<double> d_log_density, std::span<double> d_log_survival) {
  check_dim(w.kind, z, w.dim());
  const std::size_t dim = w.dim();
  const bool want_grad = !d_log_density.empty();
  if (want_grad && (d_log_density.size() != dim || d_log_survival.size() != dim)) {
    throw DimensionMismatch("gradient buffers must match head output dimension");
  }

  HeadEvaluation out;
  if (is_density_head(w.kind)) {
    Scratch s_rate(want_grad ? dim : 0), s_rem(want_grad ? dim : 0), s_norm(want_grad ? dim : 0);
    const auto p_rate = s_rate.get();
    const auto p_rem = s_rem.get();
    const auto p_norm = s_norm.get();
    const double log_norm = log_sum_exp_nonneg(z, w.normalizer, p_norm);
    out.log_density = log_sum_exp_nonneg(z, w.rate, p_rate) - log_norm;
    if (w.at_origin) {
      out.log_survival = 0.0;
    } else {
      out.log_survival = log_sum_exp_nonneg(z, w.remaining, p_rem) - log_norm;
    }
    out.cumulative_hazard = -out.log_survival;
    out.hazard = std::exp(out.log_density - out.log_survival);
    if (want_grad) {
      for (std::size_t i = 0; i < dim; ++i) {
        d_log_density[i] = p_rate[i] - p_norm[i];
        d_log_survival[i] = w.at_origin ? 0.0 : p_rem[i] - p_norm[i];
      }
    }
  } else {
    Scratch s_rate(want_grad ? dim : 0);
    const auto p_rate = s_rate.get();
    const double log_h = log_sum_exp_nonneg(z, w.rate, p_rate);
    double cum = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      if (w.remaining[i] > 0.0) cum += w.remaining[i] * std::exp(z[i]);
    }
    out.cumulative_hazard = cum;
    out.log_survival = -cum;
    out.hazard = std::exp(log_h);
    out.log_density = log_h - cum;
    if (want_grad) {
      for (std::size_t i = 0; i < dim; ++i) {
        const double d_cum = w.remaining[i] > 0.0 ? w.remaining[i] * std::exp(z[i]) : 0.0;
        d_log_survival[i] = -d_cum;
        d_log_density[i] = p_rate[i] - d_cum;
      }
    }
  }
  return out;
}

HeadEvaluation evaluate(const HeadWeights& w, std::span<const double> z) {
  return evaluate(w, z, {}, {});
}

HeadEvaluation evaluate(HeadKind kind, std::span<const double> z, const TimeGrid& grid, double t) {
  check_dim(kind, z, output_dim(kind, grid.segments()));
  return evaluate(head_weights(kind, grid, t), z);
}

std::vector<double> density_levels_constant(std::span<const double> z, const TimeGrid& grid) {
  const std::size_t n = grid.segments();
  check_dim(HeadKind::ConstantDensity, z, n + 1);
  std::vector<double> weights(grid.widths().begin(), grid.widths().end());
  weights.push_back(1.0);
  const double log_norm = log_sum_exp(z, weights);
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = std::exp(z[i] - log_norm);
  return f;
}

std::vector<double> density_nodes_linear(std::span<const double> z, const TimeGrid& grid) {
  const std::size_t n = grid.segments();
  check_dim(HeadKind::LinearDensity, z, n + 2);
  std::vector<double> weights(n + 2, 0.0);
  for (std::size_t j = 0; j < n; ++j) add_segment_mass(weights, j, grid.width(j));
  weights[n + 1] = 1.0;
  const double log_norm = log_sum_exp(z, weights);
  std::vector<double> f(n + 1);
  for (std::size_t i = 0; i <= n; ++i) f[i] = std::exp(z[i] - log_norm);
  return f;
}

std::vector<double> hazard_levels_constant(std::span<const double> z) {
  std::vector<double> h(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) h[i] = std::exp(z[i]);
  return h;
}

std::vector<double> hazard_nodes_linear(std::span<const double> z) {
  return hazard_levels_constant(z);
}

HeadEvaluation eval_constant_density(std::span<const double> z, const TimeGrid& grid, double t) {
  return evaluate(HeadKind::ConstantDensity, z, grid, t);
}
HeadEvaluation eval_linear_density(std::span<const double> z, const TimeGrid& grid, double t) {
  return evaluate(HeadKind::LinearDensity, z, grid, t);
}
HeadEvaluation eval_constant_hazard(std::span<const double> z, const TimeGrid& grid, double t) {
  return evaluate(HeadKind::ConstantHazard, z, grid, t);
}
HeadEvaluation eval_linear_hazard(std::span<const double> z, const TimeGrid& grid, double t) {
  return evaluate(HeadKind::LinearHazard, z, grid, t);
}

}  // namespace pwsurv
