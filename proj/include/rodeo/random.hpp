#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rodeo {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Stream seed for one image, a pure function of (seed, image id) so images
/// can be corrupted in any order or in parallel.
inline constexpr std::uint64_t image_seed(std::uint64_t seed, std::string_view image_id) noexcept {
  return splitmix64(splitmix64(seed) ^ fnv1a(image_id));
}

}  // namespace rodeo
