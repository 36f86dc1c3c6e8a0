#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace imgcl {

using Rng = std::mt19937_64;

/// Mixes a 64-bit value (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

/// Derives the seed of a named substream from a root seed. Every module draws
/// from its own substream so that changing the number of draws in one
/// component leaves the others untouched.
std::uint64_t substream_seed(std::uint64_t root, std::string_view name);

/// Same as above with an extra integer index (epoch, stage, shard, ...).
std::uint64_t substream_seed(std::uint64_t root, std::string_view name, std::uint64_t index);

inline Rng make_rng(std::uint64_t root, std::string_view name) {
  return Rng(substream_seed(root, name));
}

inline Rng make_rng(std::uint64_t root, std::string_view name, std::uint64_t index) {
  return Rng(substream_seed(root, name, index));
}

/// Uniform double in [0, 1) using the top 53 bits; identical on every platform.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace imgcl
