#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace uncseg {

// Deterministic random stream built on splitmix64. Hand-rolled (rather than
// <random> distributions) so that sequences are bit-identical across
// standard library implementations, which the pipeline determinism contract
// depends on.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  // Independent substream. fork(i) != fork(j) for i != j, and forking does
  // not advance this stream.
  Rng fork(uint64_t stream) const {
    return Rng(mix(state_ + 0x9e3779b97f4a7c15ull) ^
               mix(stream + 0xbf58476d1ce4e5b9ull));
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // Uniform in [0, 1).
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  int uniform_int(int n) { return int(next_u64() % uint64_t(n)); }

  // Standard normal via Box-Muller; pairs are cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(t);
    have_cached_ = true;
    return r * std::cos(t);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = size_t(next_u64() % i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  uint64_t state_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace uncseg
