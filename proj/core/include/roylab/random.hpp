#pragma once

#include <cstdint>
#include <random>

namespace roylab {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for repetition `rep` of an experiment.
inline std::uint64_t repetition_seed(std::uint64_t base_seed, std::uint64_t rep) {
  return splitmix64(splitmix64(base_seed) ^ (rep + 1) * 0xd1342543de82ef95ULL);
}

/// Independent generator for one worker; depends only on the seed and the worker id,
/// so the draws do not depend on how workers are split across threads.
inline Rng worker_rng(std::uint64_t seed, std::uint64_t worker_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(worker_id),
                    static_cast<std::uint32_t>(worker_id >> 32)};
  return Rng(seq);
}

}  // namespace roylab
