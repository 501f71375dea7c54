#pragma once

#include <cstdint>
#include <random>

namespace pwsurv {

/// Deterministic random source: std::mt19937_64 (fully specified by the C++
/// standard) with hand-rolled conversions to doubles, since the standard
/// distributions are implementation-defined and would break cross-platform
/// reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on the open interval (0, 1).
  double uniform_open01() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Uniform integer on [0, n) for n >= 1 (rejection sampling).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

/// Seed of the `index`-th child stream of `master`: the first output of
/// mt19937_64 seeded with master + index * 0x9E3779B97F4A7C15.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace pwsurv
