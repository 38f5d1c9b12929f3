#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace mtdiff {

/// Seeded pseudo-random source. Every stochastic routine takes one explicitly so
/// that a (seed, stream) pair fully determines its output.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed);
  /// Independent sub-stream, e.g. one per agent within a replica.
  Rng(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on {0, ..., n-1}; n must be positive.
  std::size_t index(std::size_t n);
  double normal() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace mtdiff
