#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string_view>

namespace csp {

using Rng = std::mt19937_64;

// splitmix64 finalizer; decorrelates structured seed inputs
constexpr uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr uint64_t hash_str(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

// Hierarchical seed derivation: master -> (tag, a, b, c). Adding new streams
// never perturbs existing ones as long as the tuples differ.
inline uint64_t derive_seed(uint64_t master, std::string_view tag, uint64_t a = 0,
                            uint64_t b = 0, uint64_t c = 0) {
  uint64_t s = mix64(master ^ hash_str(tag));
  s = mix64(s ^ a);
  s = mix64(s ^ b);
  s = mix64(s ^ c);
  return s;
}

inline Rng make_rng(uint64_t master, std::string_view tag, uint64_t a = 0, uint64_t b = 0,
                    uint64_t c = 0) {
  return Rng(derive_seed(master, tag, a, b, c));
}

// Raw-output draws; std:: distributions are not bit-stable across stdlibs.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

inline size_t uniform_index(Rng& rng, size_t n) {
  if (n <= 1) return 0;
  const uint64_t limit =
      std::numeric_limits<uint64_t>::max() - std::numeric_limits<uint64_t>::max() % n;
  uint64_t x = rng();
  while (x >= limit) x = rng();
  return static_cast<size_t>(x % n);
}

inline size_t weighted_index(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  for (size_t i = 0; i + 1 < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.empty() ? 0 : weights.size() - 1;
}

}  // namespace csp
