#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cbnn {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Child seed for a named task: FNV-1a of the task name, folded with the
/// parent seed and the task index through splitmix64. Every random stream in
/// the project is derived this way from the single global seed.
inline std::uint64_t derive_seed(std::uint64_t parent, std::string_view task,
                                 std::uint64_t index = 0) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : task) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return splitmix64(splitmix64(parent ^ h) + index);
}

}  // namespace cbnn
