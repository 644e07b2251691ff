#pragma once

#include <cmath>
#include <cstdint>

namespace mtsysid {

/// Counter-based pseudo-random generator (SplitMix64 output function over an
/// incrementing counter). Unlike std::normal_distribution, the draw sequence
/// is fully pinned down here, so identical seeds give identical streams on
/// every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : counter_(seed) {}

  std::uint64_t next_u64() {
    counter_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = counter_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform draw in [0, 1) with 53 bits of entropy.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal draw via Box-Muller; the second value of each pair is
  /// cached so consecutive calls consume two uniforms per two gaussians.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Derives an independent stream for substream `index` (per-system seeds
  /// and the like) without correlating with the parent stream.
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    Rng mix(seed ^ (0xD1342543DE82EF95ull * (index + 1)));
    return mix.next_u64();
  }

 private:
  std::uint64_t counter_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mtsysid
