#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace linbai {

/// SplitMix64 finalizer applied to `seed + (index + 1) * 0x9E3779B97F4A7C15`.
///
///   z = seed + (index + 1) * 0x9E3779B97F4A7C15
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// All arithmetic is modulo 2^64, so any language reproduces the same
/// substream seeds.
std::uint64_t stable_mix(std::uint64_t seed, std::uint64_t index);

/// Standard normal quantile (Wichura, AS 241, PPND16). Relative accuracy
/// about 1e-16 on (0, 1).
double normal_quantile(double p);

/// Portable random stream. The engine is std::mt19937_64, whose output
/// sequence is fixed by the C++ standard; every derived variate below is
/// computed here rather than through <random> distributions, whose
/// algorithms differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1): ((u >> 11) + 0.5) * 2^-53.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal by inversion of a single uniform.
  double gaussian() { return normal_quantile(uniform()); }

  /// Fair sign, taken from the top bit.
  bool coin() { return (engine_() >> 63) != 0; }

  /// Uniform integer in [0, n), Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n);

  /// Derived independent stream: Rng(stable_mix(seed(), index)).
  Rng substream(std::uint64_t index) const { return Rng(stable_mix(seed_, index)); }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace linbai
