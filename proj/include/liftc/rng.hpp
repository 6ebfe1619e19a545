#pragma once

#include <cstdint>
#include <random>
#include <string>

// Deterministic random streams. Draws are implemented directly on top of
// mt19937_64 output rather than <random> distributions so that sequences are
// identical across standard library implementations.

namespace liftc {

class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next() { return gen_(); }

  // inclusive range; spans here are tiny so modulo bias is irrelevant
  long long uniform_int(long long lo, long long hi) {
    uint64_t span = (uint64_t)(hi - lo) + 1;
    return lo + (long long)(gen_() % span);
  }

  double uniform_real(double lo, double hi) {
    double u = (double)(gen_() >> 11) * 0x1.0p-53;  // [0,1)
    return lo + u * (hi - lo);
  }

  // Derive a substream seed from a label, so independent units draw from
  // independent streams regardless of scheduling order.
  static uint64_t mix(uint64_t seed, const std::string& tag) {
    uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : tag) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    uint64_t x = seed ^ h;
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace liftc
