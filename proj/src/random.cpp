#include "miab/random.hpp"

#include <limits>

namespace miab {

namespace {

std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : engine_(seeded(seed, stream)) {}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection sampling over the largest multiple of n.
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = kMax - (kMax % n + 1) % n;
  std::uint64_t x = engine_();
  while (x > limit) {
    x = engine_();
  }
  return x % n;
}

double Rng::unit() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

}  // namespace miab
