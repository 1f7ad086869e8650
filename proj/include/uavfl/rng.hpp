#pragma once

#include <cstdint>
#include <random>

namespace uavfl {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent streams from one seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                     std::uint64_t b = 0) {
  return mix_seed(mix_seed(mix_seed(base) ^ a) ^ (b * 0x2545f4914f6cdd1dULL));
}

inline Rng make_rng(std::uint64_t base, std::uint64_t a = 0,
                    std::uint64_t b = 0) {
  return Rng(derive_seed(base, a, b));
}

}  // namespace uavfl
