#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace assort {

// Deterministic random source. All randomness in the library flows through
// explicitly seeded instances of this class; substreams are derived from a
// master seed with derive_seed so that adding runs or models to an experiment
// never perturbs the draws of existing ones.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution. Implemented directly on the
  // raw engine output so sequences do not depend on the standard library's
  // distribution implementations.
  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  // Unbiased integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// Counter-based substream derivation: hashes the master seed together with a
// path of stream identifiers.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = detail::splitmix64(master);
  for (std::uint64_t word : path) h = detail::splitmix64(h ^ word);
  return h;
}

}  // namespace assort
