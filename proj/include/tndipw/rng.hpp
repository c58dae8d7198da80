#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace tndipw {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for a child stream identified by a path of indices below `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t s = mix64(seed);
  for (const std::uint64_t p : path) s = mix64(s ^ mix64(p + 0x632be59bd9b4e019ULL));
  return s;
}

/// Stream identifiers for derive_seed paths.
enum class Stream : std::uint64_t {
  population = 1,
  case_control_sample = 2,
  tnd_sample = 3,
  bootstrap = 4,
  truth_population = 5,
};

constexpr std::uint64_t stream_id(Stream s) noexcept { return static_cast<std::uint64_t>(s); }

/// Portable random source: the engine is std::mt19937_64 and every derived
/// variate is computed here, so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Uniform integer in [0, bound) by rejection; bound must be positive.
  std::size_t below(std::size_t bound) noexcept {
    const std::uint64_t b = bound;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % b;
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return static_cast<std::size_t>(v % b);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tndipw
