#pragma once

#include <cstdint>

namespace hh412 {

// splitmix64: counter-based generator. Each shot derives its own stream from
// (seed, shot index), so sample order and thread count never change results.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t s) : state(s) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return double(next() >> 11) * 0x1.0p-53; }
};

inline SplitMix64 shot_rng(std::uint64_t seed, std::uint64_t shot_index) {
    SplitMix64 mix(seed ^ (shot_index * 0xD1B54A32D192ED03ull));
    std::uint64_t s = mix.next();
    return SplitMix64(s);
}

}  // namespace hh412
