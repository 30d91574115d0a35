#pragma once

#include <cmath>
#include <cstdint>

namespace nav {

// Deterministic PRNG with explicit distributions so that results do not
// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : state_(splitmix(seed + 0x9e3779b97f4a7c15ull)) {}

  // Derive an independent stream from (seed, stream ids). Used to give each
  // environment / episode / epoch its own reproducible stream.
  static Rng derive(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t s = splitmix(seed ^ 0x6a09e667f3bcc909ull);
    s = splitmix(s ^ mix(a, 0xbb67ae8584caa73bull));
    s = splitmix(s ^ mix(b, 0x3c6ef372fe94f82bull));
    s = splitmix(s ^ mix(c, 0xa54ff53a5f1d36f1ull));
    Rng r;
    r.state_ = s;
    return r;
  }

  uint64_t next_u64() {
    // xorshift64* — small, fast, good enough for simulation noise.
    uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545f4914f6cdd1dull;
  }

  // Uniform in [0, 1).
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    return lo + int64_t(next_u64() % uint64_t(hi - lo + 1));
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller (no cached spare; keeps draw count
  // predictable for stream reproducibility).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  static uint64_t splitmix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }
  static uint64_t mix(uint64_t v, uint64_t salt) { return splitmix(v ^ salt); }

  uint64_t state_;
};

// FNV-1a, used for content-addressed run ids and config hashes.
inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace nav
