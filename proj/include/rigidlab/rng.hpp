#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace rigidlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Reproducible 64-bit generator. Independent streams are split from a master
// seed by key, so parallel work items draw from fixed streams regardless of
// which thread runs them.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  static Rng stream(std::uint64_t seed, std::uint64_t key) {
    return Rng(splitmix64(seed) ^ splitmix64(key + 0x632be59bd9b4e019ULL));
  }

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double normal() { return normal_(engine_); }

  // Index i with probability cumulative[i] - cumulative[i-1]; the last
  // entry is treated as 1.
  std::size_t pick(std::span<const double> cumulative) {
    const double u = uniform();
    for (std::size_t i = 0; i + 1 < cumulative.size(); ++i)
      if (u < cumulative[i]) return i;
    return cumulative.size() - 1;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace rigidlab
