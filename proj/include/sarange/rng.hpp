#pragma once

#include <cstdint>
#include <random>

namespace sarange {

// All stochastic components draw from this engine, seeded explicitly. Nothing
// reads entropy from the environment.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace sarange
