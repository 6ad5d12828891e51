#pragma once

#include <cstdint>
#include <random>

namespace tedbeta {

// Splittable seeding: every consumer derives its own engine from a (seed, tag)
// pair, so parallel Monte Carlo reps and the independent noise sources inside
// one simulation never share or race on a stream.  Mixing is SplitMix64, which
// scrambles even adjacent (seed, tag) pairs into unrelated states.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t s = seed ^ (0x632be59bd9b4e019ULL * (tag + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t tag) {
  return std::mt19937_64(derive_seed(seed, tag));
}

}  // namespace tedbeta
