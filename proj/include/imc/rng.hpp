#pragma once

// Seeded RNG streams. A stream is derived from (seed, stream_index) via
// splitmix64 so that chunked estimators draw identical numbers no matter how
// chunks are assigned to worker threads.

#include <cstdint>
#include <random>

namespace imc {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : gen_(splitmix64(splitmix64(seed) ^ (stream + 0x51ed270b7a2fe9a1ULL))) {}

  // Uniform in [0, 1); 53-bit mantissa path, stable across platforms.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller on the uniform() path above (keeps the
  // stream independent of stdlib distribution internals).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t bits() { return gen_(); }

  // Index in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace imc
