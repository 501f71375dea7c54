#include "pwsurv/rng.hpp"

namespace pwsurv {

std::uint64_t Rng::below(std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::mt19937_64 engine(master + index * 0x9E3779B97F4A7C15ULL);
  return engine();
}

}  // namespace pwsurv
