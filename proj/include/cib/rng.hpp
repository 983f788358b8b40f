#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cib {

using Rng = std::mt19937_64;

/// Independent generator for a named purpose ("init", "minibatch", "noise",
/// "splits", ...) derived from one run seed. Streams with different names
/// never share state, so changing how much one consumer draws leaves the
/// others untouched.
inline Rng make_stream(std::uint64_t seed, std::string_view name) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

}  // namespace cib
