#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pgtk {

// Uniform double in [0,1) from the top 53 bits of a mt19937_64 draw.
// mt19937_64 output is fully specified by the standard, so streams built
// this way reproduce bit-for-bit across builds.
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
inline double uniform(std::mt19937_64& gen, double lo, double hi) {
    return lo + (hi - lo) * uniform01(gen);
}

// FNV-1a 64-bit over raw bytes.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace pgtk
