#pragma once

#include <cstdint>
#include <random>

#include "owns/types.hpp"

namespace owns {

/// Derive an independent stream seed from (seed, index). All randomness in the
/// library funnels through this so runs are reproducible from a single seed.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 over the combined word
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t index = 0) {
    return std::mt19937_64(substream_seed(seed, index));
}

/// Complex scalar with real/imag parts uniform in [-1, 1].
inline cxd uniform_complex(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double re = u(rng);
    const double im = u(rng);
    return {re, im};
}

/// Vector of uniform_complex entries.
inline Vec uniform_complex_vector(std::mt19937_64& rng, Eigen::Index n) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform_complex(rng);
    return v;
}

}  // namespace owns
