// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace otacal {

using RngStream = std::mt19937_64;

// SplitMix64 finalizer, used to decorrelate (seed, index) pairs.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream for (master_seed, stream_index).  The same pair always
/// yields the same stream state, regardless of which thread instantiates it
/// or in which order, which is what makes Monte Carlo runs reproducible
/// under parallel execution.
inline RngStream derive_stream(std::uint64_t master_seed, std::uint64_t stream_index) {
  const std::uint64_t s = splitmix64(master_seed ^ splitmix64(stream_index + 0x632be59bd9b4e019ULL));
  return RngStream(s);
}

}  // namespace otacal
