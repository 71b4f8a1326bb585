#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace fbmlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Per-replication seed schedule: seed_i = splitmix(seed_base, i).
/// Replications can run on any worker in any order and still see the
/// same stream.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t replication) {
  return splitmix64(base + 0x9e3779b97f4a7c15ULL * (replication + 1));
}

/// Deterministic standard-normal stream. mt19937_64 output is fixed by the
/// standard and the Box-Muller step below is explicit, so the same seed
/// produces the same doubles on every platform (std::normal_distribution
/// does not give that guarantee).
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;          // [0,1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Uniform on [0,1).
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace fbmlab
