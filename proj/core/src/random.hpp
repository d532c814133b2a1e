#pragma once

#include <cstdint>
#include <random>

namespace idde::detail {

using Engine = std::mt19937_64;

// Uniform double in [0, 1) from the top 53 bits. Unlike
// std::uniform_real_distribution this is identical across standard libraries.
inline double unit_uniform(Engine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace idde::detail
