#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace textcat {

// Seeded RNG with hand-rolled draw helpers. std::mt19937_64 output is pinned
// by the standard; the helpers below avoid std distributions so that draw
// sequences stay identical across standard library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1), 53 bits of randomness.
  double uniform() { return (gen_() >> 11) * (1.0 / 9007199254740992.0); }

  // Uniform double in [a, b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Uniform integer in [0, n); n must be > 0.
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

  // Deterministic Fisher-Yates shuffle.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

// Stable seed mixing for derived streams (per worker, per class, ...).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace textcat
