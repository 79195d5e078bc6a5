#pragma once

#include <cstdint>
#include <random>

namespace s2v {

// splitmix64 step, used to derive independent streams (one per worker,
// one for corpus generation, ...) from a single user-facing seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// mt19937_64 with explicit bit-to-double conversion. The standard pins the
// mt19937_64 sequence but not the distributions, so we avoid <random>'s
// distribution classes anywhere reproducibility matters.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // uniform in [0, n)
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  // uniform in [0, 1)
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace s2v
