#pragma once

#include <cstdint>
#include <random>

namespace wassos {

/// Seedable generator with a fixed, platform-independent conversion to
/// doubles. std::uniform_real_distribution and std::normal_distribution are
/// implementation-defined, so we derive both from raw 64-bit draws instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (both outputs are used).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Seed used for replication `rep` of a sweep with base seed `base`.
inline std::uint64_t replication_seed(std::uint64_t base, std::uint64_t rep) { return base + rep; }

}  // namespace wassos
