#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace isacsim {

/// Deterministic per-trial random stream.
///
/// Streams are derived from (master seed, stream id) through a splitmix64
/// scramble, so trial i of a Monte Carlo run always sees the same sequence
/// regardless of worker count or scheduling order. The engine is
/// std::mt19937_64 (fully specified by the standard) and the Gaussian
/// transform is our own Box-Muller, so sequences are reproducible across
/// standard library implementations.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id) {
    const std::uint64_t a = scramble(master_seed, 2 * stream_id);
    const std::uint64_t b = scramble(master_seed, 2 * stream_id + 1);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    engine_.seed(seq);
  }

  /// Uniform double in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal draw (Box-Muller, caches the spare deviate).
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  static std::uint64_t scramble(std::uint64_t master, std::uint64_t salt) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
  double spare_{0.0};
  bool has_spare_{false};
};

}  // namespace isacsim
