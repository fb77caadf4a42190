#pragma once

#include <cstdint>
#include <random>

namespace hazardforge {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for replicate/chunk `stream` of a run seeded with `seed`.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// Counter-based uniform on (0, 1) from a key; no state.
inline double hashed_uniform(std::uint64_t key) {
  return (static_cast<double>(splitmix64(key) >> 11) + 0.5) * 0x1.0p-53;
}

/// mt19937_64 with portable draws: every variate is an inverse CDF of a
/// 53-bit uniform, so streams are bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}
  static Rng stream(std::uint64_t seed, std::uint64_t id) { return Rng(stream_seed(seed, id)); }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  double exponential(double rate);
  double weibull(double shape, double scale);
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  /// Index drawn with probabilities proportional to `weights`.
  template <class Range>
  std::size_t categorical(const Range& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    std::size_t k = 0;
    std::size_t last = 0;
    for (double w : weights) {
      if (w > 0.0) {
        last = k;
        if (u < w) return k;
        u -= w;
      }
      ++k;
    }
    return last;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hazardforge
