#ifndef RKSTAB_SEED_HPP
#define RKSTAB_SEED_HPP

#include <cstdint>
#include <random>

namespace rkstab {

/// SplitMix64 finalizer (Steele, Lea & Flood). Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of grid cell (row, col) in a sweep started from `seed`:
///   mix(seed, row, col) = splitmix64(splitmix64(splitmix64(seed) ^ row) ^ col)
/// Rows index sigma_r, columns index sigma_i.
constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t row, std::uint64_t col) {
  return splitmix64(splitmix64(splitmix64(seed) ^ row) ^ col);
}

/// Independent sub-streams of one experiment seed.
enum class Stream : std::uint64_t {
  InternalWeights = 1,
  InputWeights = 2,
  InputsFirst = 3,
  InputsSecond = 4,
  InitFirst = 5,
  InitSecond = 6,
};

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream) {
  return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(stream));
}

using Rng = std::mt19937_64;

}  // namespace rkstab

#endif  // RKSTAB_SEED_HPP
