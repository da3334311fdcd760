#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "iris/common.hpp"

namespace iris {

// Deterministic random generator (splitmix64) with explicit distribution
// transforms, so streams are identical across platforms and standard
// libraries. All seeded behaviour in the project goes through this class.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed + 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // in [0, 1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // inclusive bounds
  i64 uniform_int(i64 lo, i64 hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<i64>(next_u64() % span);
  }

  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Derived independent stream; forking with distinct tags never collides
  // with draws from the parent.
  Rng fork(std::uint64_t tag) {
    Rng child(state_ ^ (0xd1342543de82ef95ull * (tag + 1)));
    child.next_u64();
    return child;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (i64 i = static_cast<i64>(v.size()) - 1; i > 0; --i) {
      const i64 j = uniform_int(0, i);
      std::swap(v[static_cast<size_t>(i)], v[static_cast<size_t>(j)]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace iris
