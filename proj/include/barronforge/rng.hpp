#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace barronforge {

/// SplitMix64 finalizer. Used to derive independent seeds from a base seed
/// and a path of stream identifiers.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// A seeded, splittable random stream.
///
/// Every stream owns its own engine. `split(id)` derives a child stream whose
/// seed depends only on the parent seed and `id`, never on how many numbers
/// the parent has already produced, so sweeps can hand out substreams in any
/// order and still reproduce bit-for-bit.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  RandomStream split(std::uint64_t id) const { return RandomStream(mix64(seed_ ^ mix64(id + 0x632be59bd9b4e019ULL))); }

  RandomStream split(std::initializer_list<std::uint64_t> path) const {
    RandomStream s = *this;
    for (auto id : path) s = s.split(id);
    return s;
  }

  std::uint64_t seed() const noexcept { return seed_; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() { return normal_(engine_); }

  /// +1 or -1 with equal probability.
  double rademacher() { return (engine_() >> 63) ? 1.0 : -1.0; }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace barronforge
