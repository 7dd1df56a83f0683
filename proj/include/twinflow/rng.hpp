#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace twinflow {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded generator with hand-rolled floating-point conversions so that a
// given (seed, call sequence) yields the same stream on every platform.
// std::mt19937_64 is bit-exact by standard; the std distributions are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0)
      : engine_(splitmix64(seed)), seed_base_(seed) {}

  // Independent child stream; distinct salts give distinct streams.
  Rng derive(std::uint64_t salt) const {
    return Rng(seed_base_ ^ splitmix64(salt ^ 0xa5a5a5a5a5a5a5a5ULL));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1): never exactly 0 or 1.
  double u01_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  // Unbiased-enough bounded integer via 128-bit multiply-shift.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  int uniform_int(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // Exp(1): strictly positive.
  double exponential() { return -std::log(u01_open()); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = u01_open();
    double v = u01_open();
    double r = std::sqrt(-2.0 * std::log(u));
    spare_ = r * std::sin(2.0 * M_PI * v);
    has_spare_ = true;
    return r * std::cos(2.0 * M_PI * v);
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_base_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace twinflow
