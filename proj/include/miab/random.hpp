#pragma once

#include <cstdint>
#include <random>

namespace miab {

// Seeded generator with portable derived draws. std::mt19937_64 and
// std::seed_seq are fully specified by the standard; the distributions in
// <random> are not, so draws are derived here to keep traces identical
// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Uniform double in [0, 1) with 53 bits of precision.
  double unit();

  bool chance(double p) { return unit() < p; }

 private:
  std::mt19937_64 engine_;
};

// Stream tags for generators that are not tied to a node id. Node streams use
// the node id itself, which is always below 2^16.
inline constexpr std::uint64_t kScenarioStream = 0x1'0000;
inline constexpr std::uint64_t kTopologyStream = 0x2'0000;

}  // namespace miab
