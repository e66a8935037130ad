#pragma once

#include <cstdint>
#include <random>

namespace uev {

/// SplitMix64 finalizer; used to turn (master seed, index) pairs into
/// well-separated child seeds.
std::uint64_t splitmix64(std::uint64_t state);

/// Deterministic child seed for sub-stream `index` of `master`. All stochastic
/// sub-steps of an engine run derive their streams through this function, so a
/// single master seed reproduces the whole computation and independent
/// sub-streams can run in parallel.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// A self-contained random stream. Never share one stream across threads;
/// derive one per task instead.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

  /// Uniform draw in [0, 1).
  double uniform() { return uniform_(gen_); }

  double normal(double mean, double sd) { return mean + sd * unit_normal_(gen_); }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> unit_normal_{0.0, 1.0};
};

}  // namespace uev
