#ifndef STROKERISK_RNG_HPP
#define STROKERISK_RNG_HPP

#include <cstdint>
#include <random>

namespace strokerisk {

/// One step of the splitmix64 mixer (Steele, Lea & Flood). Used to turn a
/// user seed plus an index into a well-spread sub-seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Sub-seed for stream `index` of a run seeded with `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(seed ^ index);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t index) {
  return Rng(derive_seed(seed, index));
}

}  // namespace strokerisk

#endif  // STROKERISK_RNG_HPP
