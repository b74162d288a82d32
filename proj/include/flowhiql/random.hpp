#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace flowhiql {

// Seeded random source. A (seed, stream) pair fully determines the sequence,
// so samplers can be re-derived from a step counter instead of carrying
// engine state through checkpoints.
class Random {
 public:
  explicit Random(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32), 0x9e3779b9u};
    engine_.seed(seq);
  }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_(engine_); }

  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  // Number of trials up to and including the first success; support {1, 2, ...}.
  std::size_t geometric(double p) {
    return std::geometric_distribution<std::size_t>(p)(engine_) + 1;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

}  // namespace flowhiql
