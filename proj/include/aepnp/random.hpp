#pragma once

#include <cstdint>
#include <random>

namespace aepnp {

// Independent stream for (seed, index); used for per-trial scenes and per-iteration samples.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

} // namespace aepnp
