#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

#include "swarmrx/types.hpp"

namespace swarmrx {

// Independent random streams. Every stochastic quantity in the simulator is a
// pure function of (seed, stream, cycle, branch).
enum class Stream : std::uint32_t {
  Payload = 1,
  Noise = 2,
  Jammer = 3,
  JammerTap = 4,
  Fading = 5,
  Delay = 6,
  Cfo = 7,
  Network = 8,
  Test = 99,
};

struct StreamKey {
  std::uint64_t seed = 0;
  Stream stream = Stream::Test;
  std::uint64_t cycle = 0;
  std::uint64_t branch = 0;
};

class Rng {
 public:
  explicit Rng(const StreamKey& key) {
    std::seed_seq seq{lo(key.seed), hi(key.seed), static_cast<std::uint32_t>(key.stream),
                      lo(key.cycle), hi(key.cycle), lo(key.branch), hi(key.branch)};
    engine_.seed(seq);
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  double uniform(double lo_v, double hi_v) {
    return std::uniform_real_distribution<double>(lo_v, hi_v)(engine_);
  }

  std::uint64_t uniform_int(std::uint64_t lo_v, std::uint64_t hi_v) {
    return std::uniform_int_distribution<std::uint64_t>(lo_v, hi_v)(engine_);
  }

  double gaussian() { return normal_(engine_); }

  // Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  cf64 complex_gaussian(double variance) {
    const double s = std::sqrt(variance / 2.0);
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {s * re, s * im};
  }

  std::uint8_t bit() { return static_cast<std::uint8_t>(engine_() & 1u); }

  std::mt19937_64& engine() { return engine_; }

 private:
  static std::uint32_t lo(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
  static std::uint32_t hi(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline BitStream random_bits(Rng& rng, std::size_t count) {
  BitStream bits(count);
  for (auto& b : bits) b = rng.bit();
  return bits;
}

}  // namespace swarmrx
