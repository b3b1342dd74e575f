#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dyadic/grid_function.hpp"

namespace dyadic {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Generator for case number `counter` of a suite seeded with `seed`, so any
/// single case can be replayed from the printed (seed, counter) pair.
inline std::mt19937_64 case_rng(std::uint64_t seed, std::uint64_t counter) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(counter + 0x632be59bd9b4e019ULL)));
}

/// Positive step function with log-uniform cell values in [lo, hi].
inline GridFunction random_step_weight(const RootSystem& sys, std::mt19937_64& rng, double lo = 1e-2,
                                       double hi = 1e2) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  std::vector<double> v(sys.cell_count());
  for (double& x : v) x = std::exp(u(rng));
  return GridFunction(sys, std::move(v));
}

/// Nonnegative function: each cell zero with probability `zero_prob`,
/// otherwise uniform in (0, 1].
inline GridFunction random_nonneg(const RootSystem& sys, std::mt19937_64& rng, double zero_prob = 0.3) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(sys.cell_count());
  for (double& x : v) x = (u(rng) < zero_prob) ? 0.0 : 1.0 - u(rng);
  return GridFunction(sys, std::move(v));
}

}  // namespace dyadic
