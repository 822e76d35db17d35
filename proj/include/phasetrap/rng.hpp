#pragma once

#include <cstdint>

namespace phasetrap {

// SplitMix64 mixer. Used to derive independent deterministic streams from
// (seed, stream-id) keys so that parallel and serial evaluation of the same
// work list produce identical results.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)));
}

// Uniform double in [0, 1) from a counter key.
inline double hash_unit(std::uint64_t key) {
  return static_cast<double>(splitmix64(key) >> 11) * 0x1.0p-53;
}

}  // namespace phasetrap
