#pragma once

#include <cstdint>
#include <random>

namespace crowdnav {

/// Seeded generator used for every stochastic choice in a trial.
///
/// Distributions are computed here rather than through <random> distribution
/// objects, whose output sequences differ between standard library vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller; caches the paired variate.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  /// Seed for an independent child stream.
  std::uint64_t fork_seed() { return mix(next_u64()); }

  /// splitmix64 finalizer.
  static std::uint64_t mix(std::uint64_t x);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace crowdnav
